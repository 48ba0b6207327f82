#include "oss/dataio.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>
#include <string_view>

#include "oss/rng.hpp"

namespace oss {

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

bool parse_finite_double(std::string_view cell, double& out) {
  cell = trim(cell);
  if (cell.empty()) return false;
  if (cell.front() == '+') cell.remove_prefix(1);  // from_chars rejects a leading '+'
  const auto res = std::from_chars(cell.data(), cell.data() + cell.size(), out);
  return res.ec == std::errc{} && res.ptr == cell.data() + cell.size() && std::isfinite(out);
}

std::vector<std::string_view> split_fields(std::string_view line) {
  std::vector<std::string_view> fields;
  std::size_t start = 0;
  while (true) {
    const std::size_t comma = line.find(',', start);
    if (comma == std::string_view::npos) {
      fields.push_back(line.substr(start));
      break;
    }
    fields.push_back(line.substr(start, comma - start));
    start = comma + 1;
  }
  return fields;
}

bool is_nonnegative_integer(std::string_view s) {
  return !s.empty() && std::all_of(s.begin(), s.end(), [](unsigned char c) { return std::isdigit(c); });
}

// Lower Cholesky factor of the equicorrelated matrix with unit diagonal and
// 0.5 off-diagonal.
Eigen::MatrixXd correlation_cholesky(Index p) {
  Eigen::MatrixXd sigma = Eigen::MatrixXd::Constant(p, p, 0.5);
  sigma.diagonal().setOnes();
  return Eigen::LLT<Eigen::MatrixXd>(sigma).matrixL();
}

}  // namespace

void validate(const SyntheticSpec& spec) {
  if (spec.n < 1 || spec.p < 1) {
    throw ValidationError("synthetic spec requires n >= 1 and p >= 1");
  }
  if (spec.noise_variance < 0.0) {
    throw ValidationError("noise variance must be non-negative");
  }
  if (spec.slopes.size() != spec.p) {
    throw ValidationError("slopes length " + std::to_string(spec.slopes.size()) +
                          " does not match p = " + std::to_string(spec.p));
  }
  const bool wants_interactions = spec.model == ModelKind::Interaction;
  if (wants_interactions != spec.interaction_effects.has_value()) {
    throw ValidationError(wants_interactions
                              ? "interaction model requires interaction_effects"
                              : "interaction_effects given but model is first-order");
  }
  if (spec.interaction_effects) {
    const Index expected = spec.p * (spec.p - 1) / 2;
    if (spec.interaction_effects->size() != expected) {
      throw ValidationError("interaction_effects length " +
                            std::to_string(spec.interaction_effects->size()) + " != p(p-1)/2 = " +
                            std::to_string(expected));
    }
  }
}

Matrix ScalingTransform::apply(const Eigen::Ref<const Matrix>& values) const {
  if (values.cols() != cols()) {
    throw ValidationError("scaling transform has " + std::to_string(cols()) +
                          " columns, data has " + std::to_string(values.cols()));
  }
  Matrix out(values.rows(), values.cols());
  for (Index j = 0; j < values.cols(); ++j) {
    const double lo = col_min[j];
    const double range = col_max[j] - lo;
    out.col(j) = 2.0 * ((values.col(j).array() - lo) / range) - 1.0;
  }
  return out;
}

Matrix ScalingTransform::invert(const Eigen::Ref<const Matrix>& scaled) const {
  if (scaled.cols() != cols()) {
    throw ValidationError("scaling transform has " + std::to_string(cols()) +
                          " columns, data has " + std::to_string(scaled.cols()));
  }
  Matrix out(scaled.rows(), scaled.cols());
  for (Index j = 0; j < scaled.cols(); ++j) {
    const double lo = col_min[j];
    const double range = col_max[j] - lo;
    out.col(j) = (scaled.col(j).array() + 1.0) * (0.5 * range) + lo;
  }
  return out;
}

DataMatrix load_csv(const std::filesystem::path& path, bool has_header,
                    const std::optional<std::string>& response_col,
                    std::vector<std::string>* names_out) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw IoError("cannot open " + path.string());
  }
  std::stringstream buffer;
  buffer << in.rdbuf();
  const std::string content = buffer.str();

  std::vector<std::string_view> lines;
  {
    std::string_view rest = content;
    while (!rest.empty()) {
      const std::size_t nl = rest.find('\n');
      std::string_view line = nl == std::string_view::npos ? rest : rest.substr(0, nl);
      if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
      lines.push_back(line);
      if (nl == std::string_view::npos) break;
      rest.remove_prefix(nl + 1);
    }
  }
  while (!lines.empty() && trim(lines.back()).empty()) lines.pop_back();
  if (lines.empty()) {
    throw ValidationError(path.string() + ": empty file");
  }

  std::vector<std::string> names;
  std::size_t first_data_line = 0;
  if (has_header) {
    for (const auto field : split_fields(lines[0])) names.emplace_back(trim(field));
    first_data_line = 1;
  }
  if (first_data_line >= lines.size()) {
    throw ValidationError(path.string() + ": no data rows");
  }
  const std::size_t ncols = split_fields(lines[first_data_line]).size();
  if (has_header && names.size() != ncols) {
    throw ValidationError(path.string() + ": header has " + std::to_string(names.size()) +
                          " fields but rows have " + std::to_string(ncols));
  }

  std::optional<std::size_t> response_index;
  if (response_col) {
    const std::string_view wanted = trim(*response_col);
    if (is_nonnegative_integer(wanted)) {
      std::size_t idx = 0;
      std::from_chars(wanted.data(), wanted.data() + wanted.size(), idx);
      if (idx >= ncols) {
        throw ValidationError(path.string() + ": response column index " + std::string(wanted) +
                              " out of range (file has " + std::to_string(ncols) + " columns)");
      }
      response_index = idx;
    } else {
      const auto it = std::find(names.begin(), names.end(), std::string(wanted));
      if (it == names.end()) {
        throw ValidationError(path.string() + ": response column \"" + std::string(wanted) +
                              "\" not found" + (has_header ? "" : " (file has no header)"));
      }
      response_index = static_cast<std::size_t>(it - names.begin());
    }
  }
  if (response_index && ncols == 1) {
    throw ValidationError(path.string() + ": no covariate columns besides the response");
  }

  const Index nrows = static_cast<Index>(lines.size() - first_data_line);
  const Index p = static_cast<Index>(ncols - (response_index ? 1 : 0));
  DataMatrix data;
  data.values.resize(nrows, p);
  if (response_index) data.response = Vector(nrows);

  auto column_label = [&](std::size_t c) {
    std::string label = "column " + std::to_string(c + 1);
    if (c < names.size() && !names[c].empty()) label += " (\"" + names[c] + "\")";
    return label;
  };

  for (Index r = 0; r < nrows; ++r) {
    const std::size_t line_no = first_data_line + static_cast<std::size_t>(r) + 1;
    const auto fields = split_fields(lines[first_data_line + static_cast<std::size_t>(r)]);
    if (fields.size() != ncols) {
      throw ValidationError(path.string() + ":" + std::to_string(line_no) + ": ragged row (" +
                            std::to_string(fields.size()) + " fields, expected " +
                            std::to_string(ncols) + ")");
    }
    Index out_col = 0;
    for (std::size_t c = 0; c < ncols; ++c) {
      double value = 0.0;
      if (!parse_finite_double(fields[c], value)) {
        throw ValidationError(path.string() + ":" + std::to_string(line_no) + ": " +
                              column_label(c) + ": \"" + std::string(trim(fields[c])) +
                              "\" is not a finite number");
      }
      if (response_index && c == *response_index) {
        (*data.response)[r] = value;
      } else {
        data.values(r, out_col++) = value;
      }
    }
  }
  validate(data);
  if (names_out) {
    names_out->clear();
    if (has_header) {
      for (std::size_t c = 0; c < ncols; ++c) {
        if (!response_index || c != *response_index) names_out->push_back(names[c]);
      }
      if (response_index) names_out->push_back(names[*response_index]);
    }
  }
  return data;
}

void write_csv(const std::filesystem::path& path, const DataMatrix& data,
               const std::vector<std::string>& header) {
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw IoError("cannot write " + path.string());
  }
  const Index total_cols = data.p() + (data.response ? 1 : 0);
  if (!header.empty()) {
    if (static_cast<Index>(header.size()) != total_cols) {
      throw ValidationError("header has " + std::to_string(header.size()) + " names for " +
                            std::to_string(total_cols) + " columns");
    }
    for (std::size_t c = 0; c < header.size(); ++c) {
      if (c) out << ',';
      out << header[c];
    }
    out << '\n';
  }
  for (Index r = 0; r < data.n(); ++r) {
    for (Index j = 0; j < data.p(); ++j) {
      if (j) out << ',';
      out << format_double(data.values(r, j));
    }
    if (data.response) out << ',' << format_double((*data.response)[r]);
    out << '\n';
  }
  if (!out) {
    throw IoError("write failed for " + path.string());
  }
}

std::pair<DataMatrix, ScalingTransform> scale_to_unit(const DataMatrix& data) {
  validate(data);
  ScalingTransform transform;
  transform.col_min = data.values.colwise().minCoeff();
  transform.col_max = data.values.colwise().maxCoeff();
  for (Index j = 0; j < data.p(); ++j) {
    if (transform.col_min[j] == transform.col_max[j]) {
      throw ValidationError("column " + std::to_string(j + 1) +
                            " is constant and cannot be scaled to [-1, 1]");
    }
  }
  DataMatrix scaled;
  scaled.values = transform.apply(data.values);
  scaled.response = data.response;
  return {std::move(scaled), std::move(transform)};
}

DataMatrix generate_covariates(const SyntheticSpec& spec) {
  validate(spec);
  Rng rng(derive_stream(spec.seed, stream::kCovariates));
  DataMatrix data;
  data.values.resize(spec.n, spec.p);
  if (spec.cov_case == CovariateCase::Uniform) {
    for (Index i = 0; i < spec.n; ++i)
      for (Index j = 0; j < spec.p; ++j) data.values(i, j) = rng.next_uniform(-1.0, 1.0);
    return data;
  }
  const Eigen::MatrixXd chol = correlation_cholesky(spec.p);
  const bool truncated = spec.cov_case == CovariateCase::TruncatedNormal;
  Eigen::VectorXd z(spec.p), row(spec.p);
  for (Index i = 0; i < spec.n; ++i) {
    do {
      for (Index j = 0; j < spec.p; ++j) z[j] = rng.next_normal();
      row.noalias() = chol * z;
    } while (truncated && row.cwiseAbs().maxCoeff() > 5.0);
    data.values.row(i) = row.transpose();
  }
  return data;
}

Vector generate_response(const DataMatrix& data, const SyntheticSpec& spec) {
  validate(spec);
  validate(data);
  if (data.p() != spec.p) {
    throw ValidationError("data has p = " + std::to_string(data.p()) + ", spec has p = " +
                          std::to_string(spec.p));
  }
  Vector y = data.values * spec.slopes;
  y.array() += spec.beta0;
  if (spec.interaction_effects) {
    const Vector& effects = *spec.interaction_effects;
    for (Index r = 0; r < data.n(); ++r) {
      double acc = 0.0;
      Index idx = 0;
      for (Index i = 0; i < spec.p; ++i)
        for (Index j = i + 1; j < spec.p; ++j) acc += effects[idx++] * data.values(r, i) * data.values(r, j);
      y[r] += acc;
    }
  }
  if (spec.noise_variance > 0.0) {
    Rng rng(derive_stream(spec.seed, stream::kResponse));
    const double sd = std::sqrt(spec.noise_variance);
    for (Index r = 0; r < y.size(); ++r) y[r] += sd * rng.next_normal();
  }
  return y;
}

Matrix expand_interactions(const Eigen::Ref<const Matrix>& values) {
  const Index p = values.cols();
  if (p < 2) {
    throw ValidationError("interaction expansion requires at least two columns");
  }
  Matrix out(values.rows(), p * (p - 1) / 2);
  Index idx = 0;
  for (Index i = 0; i < p; ++i)
    for (Index j = i + 1; j < p; ++j) out.col(idx++) = values.col(i).cwiseProduct(values.col(j));
  return out;
}

Vector interaction_means(const Eigen::Ref<const Matrix>& values) {
  const Index p = values.cols();
  if (p < 2) {
    throw ValidationError("interaction expansion requires at least two columns");
  }
  const Eigen::MatrixXd gram =
      (values.transpose() * values) / static_cast<double>(values.rows());
  Vector means(p * (p - 1) / 2);
  Index idx = 0;
  for (Index i = 0; i < p; ++i)
    for (Index j = i + 1; j < p; ++j) means[idx++] = gram(i, j);
  return means;
}

SyntheticSpec parse_spec_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw IoError("cannot open " + path.string());
  }
  std::map<std::string, std::string> kv;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string_view stripped = trim(line);
    if (stripped.empty() || stripped.front() == '#') continue;
    const std::size_t eq = stripped.find('=');
    if (eq == std::string_view::npos) {
      throw ValidationError(path.string() + ":" + std::to_string(line_no) +
                            ": expected key=value");
    }
    kv[std::string(trim(stripped.substr(0, eq)))] = std::string(trim(stripped.substr(eq + 1)));
  }

  static const std::vector<std::string> known = {"case", "n",     "p",      "seed",
                                                 "model", "beta0", "sigma2", "slopes",
                                                 "interactions"};
  for (const auto& [key, value] : kv) {
    if (std::find(known.begin(), known.end(), key) == known.end()) {
      throw ValidationError(path.string() + ": unknown key \"" + key + "\"");
    }
  }
  auto require = [&](const std::string& key) -> const std::string& {
    const auto it = kv.find(key);
    if (it == kv.end()) throw ValidationError(path.string() + ": missing key \"" + key + "\"");
    return it->second;
  };
  auto parse_count = [&](const std::string& key) {
    const std::string& raw = require(key);
    Index value = 0;
    const auto res = std::from_chars(raw.data(), raw.data() + raw.size(), value);
    if (res.ec != std::errc{} || res.ptr != raw.data() + raw.size() || value < 1) {
      throw ValidationError(path.string() + ": " + key + " must be a positive integer");
    }
    return value;
  };
  auto parse_num = [&](const std::string& key, double fallback) {
    const auto it = kv.find(key);
    if (it == kv.end()) return fallback;
    double value = 0.0;
    if (!parse_finite_double(it->second, value)) {
      throw ValidationError(path.string() + ": " + key + " must be a finite number");
    }
    return value;
  };
  auto parse_vec = [&](const std::string& key, Index length) {
    Vector out = Vector::Ones(length);
    const auto it = kv.find(key);
    if (it == kv.end()) return out;
    std::vector<double> parsed;
    for (const auto field : split_fields(it->second)) {
      double value = 0.0;
      if (!parse_finite_double(field, value)) {
        throw ValidationError(path.string() + ": " + key + " has a non-numeric entry");
      }
      parsed.push_back(value);
    }
    if (parsed.size() == 1) {
      out.setConstant(parsed[0]);
    } else if (static_cast<Index>(parsed.size()) == length) {
      for (Index i = 0; i < length; ++i) out[i] = parsed[static_cast<std::size_t>(i)];
    } else {
      throw ValidationError(path.string() + ": " + key + " needs 1 or " + std::to_string(length) +
                            " values, got " + std::to_string(parsed.size()));
    }
    return out;
  };

  SyntheticSpec spec;
  const std::string& case_name = require("case");
  if (case_name == "uniform") spec.cov_case = CovariateCase::Uniform;
  else if (case_name == "normal") spec.cov_case = CovariateCase::Normal;
  else if (case_name == "truncated-normal") spec.cov_case = CovariateCase::TruncatedNormal;
  else throw ValidationError(path.string() + ": unknown case \"" + case_name + "\"");

  spec.n = parse_count("n");
  spec.p = parse_count("p");
  if (const auto it = kv.find("seed"); it != kv.end()) {
    const auto res = std::from_chars(it->second.data(), it->second.data() + it->second.size(),
                                     spec.seed);
    if (res.ec != std::errc{} || res.ptr != it->second.data() + it->second.size()) {
      throw ValidationError(path.string() + ": seed must be a non-negative integer");
    }
  }
  if (const auto it = kv.find("model"); it != kv.end()) {
    if (it->second == "first-order") spec.model = ModelKind::FirstOrder;
    else if (it->second == "interaction") spec.model = ModelKind::Interaction;
    else throw ValidationError(path.string() + ": unknown model \"" + it->second + "\"");
  }
  spec.beta0 = parse_num("beta0", 0.0);
  spec.noise_variance = parse_num("sigma2", 0.0);
  spec.slopes = parse_vec("slopes", spec.p);
  if (spec.model == ModelKind::Interaction) {
    spec.interaction_effects = parse_vec("interactions", spec.p * (spec.p - 1) / 2);
  } else if (kv.count("interactions")) {
    throw ValidationError(path.string() + ": interactions given but model is first-order");
  }
  validate(spec);
  return spec;
}

}  // namespace oss
