#include "oss/evaluation.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>

#include <json.hpp>

#include "oss/baselines.hpp"
#include "oss/parallel.hpp"
#include "oss/rng.hpp"
#include "oss/select.hpp"

namespace oss {

std::string to_string(Method method) {
  switch (method) {
    case Method::Uni: return "uni";
    case Method::Iboss: return "iboss";
    case Method::Oss: return "oss";
  }
  return "?";
}

Method parse_method(const std::string& name) {
  if (name == "uni") return Method::Uni;
  if (name == "iboss") return Method::Iboss;
  if (name == "oss") return Method::Oss;
  throw ValidationError("unknown method \"" + name + "\" (expected oss, uni, or iboss)");
}

std::vector<std::string> design_term_names(Index p, bool with_interactions) {
  std::vector<std::string> names;
  names.reserve(static_cast<std::size_t>(1 + p + (with_interactions ? p * (p - 1) / 2 : 0)));
  names.emplace_back("intercept");
  for (Index j = 1; j <= p; ++j) names.push_back("x" + std::to_string(j));
  if (with_interactions) {
    for (Index i = 1; i <= p; ++i)
      for (Index j = i + 1; j <= p; ++j)
        names.push_back("x" + std::to_string(i) + ":x" + std::to_string(j));
  }
  return names;
}

FitResult ols_fit(const Eigen::Ref<const Matrix>& x_rows, const Eigen::Ref<const Vector>& y,
                  bool with_interactions) {
  const Index rows = x_rows.rows();
  const Index p = x_rows.cols();
  if (y.size() != rows) {
    throw ValidationError("response length " + std::to_string(y.size()) +
                          " does not match row count " + std::to_string(rows));
  }
  const Index extra = with_interactions ? p * (p - 1) / 2 : 0;
  const Index cols = 1 + p + extra;
  if (rows <= cols) {
    throw ValidationError("underdetermined system: " + std::to_string(rows) + " rows for " +
                          std::to_string(cols) + " design columns");
  }
  Eigen::MatrixXd design(rows, cols);
  design.col(0).setOnes();
  design.middleCols(1, p) = x_rows;
  if (with_interactions) design.rightCols(extra) = expand_interactions(x_rows);

  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(design);
  if (qr.rank() < cols) {
    const auto perm = qr.colsPermutation().indices();
    Index offender = cols - 1;
    for (Index i = qr.rank(); i < cols; ++i) offender = std::min<Index>(offender, perm[i]);
    const auto names = design_term_names(p, with_interactions);
    throw ValidationError("rank-deficient design: term \"" +
                          names[static_cast<std::size_t>(offender)] +
                          "\" is linearly dependent on the others");
  }
  const Vector beta = qr.solve(y);
  FitResult fit;
  fit.intercept = beta[0];
  fit.slopes = beta.tail(cols - 1);
  return fit;
}

double adjusted_intercept(double y_bar, const Eigen::Ref<const Vector>& x_bar,
                          const Eigen::Ref<const Vector>& slopes) {
  if (x_bar.size() != slopes.size()) {
    throw ValidationError("mean vector length " + std::to_string(x_bar.size()) +
                          " does not match slope count " + std::to_string(slopes.size()));
  }
  return y_bar - x_bar.dot(slopes);
}

Matrix information_matrix(const Eigen::Ref<const Matrix>& scaled_rows) {
  const Index k = scaled_rows.rows();
  const Index q = scaled_rows.cols() + 1;
  Eigen::MatrixXd design(k, q);
  design.col(0).setOnes();
  design.rightCols(q - 1) = scaled_rows;
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(q, q);
  m.selfadjointView<Eigen::Lower>().rankUpdate(design.transpose());
  m.triangularView<Eigen::StrictlyUpper>() = m.transpose();
  return m;
}

EfficiencyReport efficiency_report(const Eigen::Ref<const Matrix>& m, Index k, Index p) {
  const Index q = p + 1;
  if (m.rows() != m.cols() || m.rows() != q) {
    throw ValidationError("information matrix must be (p+1)x(p+1)");
  }
  if (k < 1) {
    throw ValidationError("subsample size k must be at least 1");
  }
  const double scale = std::max(1.0, m.cwiseAbs().maxCoeff());
  if (((m - m.transpose()).cwiseAbs().maxCoeff()) > 1e-10 * scale) {
    throw ValidationError("information matrix is not symmetric");
  }
  const Eigen::MatrixXd dense = m;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(dense);
  const Vector eigs = solver.eigenvalues();
  const double largest = eigs[q - 1];
  const double tol = static_cast<double>(q) * std::numeric_limits<double>::epsilon() *
                     std::max(largest, 0.0);
  EfficiencyReport report;
  if (eigs[0] <= tol) {
    // Singular information matrix: the optimality functional diverges, so the
    // efficiencies degenerate to 0.
    report.log_det_ms = -std::numeric_limits<double>::infinity();
    report.trace_ms_inv = std::numeric_limits<double>::infinity();
    return report;
  }
  double log_det = 0.0;
  double trace_inv = 0.0;
  for (Index i = 0; i < q; ++i) {
    log_det += std::log(eigs[i]);
    trace_inv += 1.0 / eigs[i];
  }
  report.log_det_ms = log_det;
  report.trace_ms_inv = trace_inv;
  report.d_eff = std::exp(log_det / static_cast<double>(q)) / static_cast<double>(k);
  report.a_eff = static_cast<double>(q) / (static_cast<double>(k) * trace_inv);
  return report;
}

double d_efficiency(const Eigen::Ref<const Matrix>& m, Index k, Index p) {
  return efficiency_report(m, k, p).d_eff;
}

double a_efficiency(const Eigen::Ref<const Matrix>& m, Index k, Index p) {
  return efficiency_report(m, k, p).a_eff;
}

double empirical_mse(const std::vector<Vector>& estimates,
                     const Eigen::Ref<const Vector>& truth) {
  if (estimates.empty()) {
    throw ValidationError("mean squared error needs at least one estimate");
  }
  std::vector<double> squared;
  squared.reserve(estimates.size());
  for (const auto& estimate : estimates) {
    if (estimate.size() != truth.size()) {
      throw ValidationError("estimate length " + std::to_string(estimate.size()) +
                            " does not match truth length " + std::to_string(truth.size()));
    }
    squared.push_back((estimate - truth).squaredNorm());
  }
  // Summing in sorted order makes the result independent of estimate order.
  std::sort(squared.begin(), squared.end());
  return std::accumulate(squared.begin(), squared.end(), 0.0) /
         static_cast<double>(squared.size());
}

double empirical_mse(const std::vector<double>& estimates, double truth) {
  std::vector<Vector> wrapped;
  wrapped.reserve(estimates.size());
  for (const double e : estimates) wrapped.push_back(Vector::Constant(1, e));
  return empirical_mse(wrapped, Vector::Constant(1, truth));
}

namespace {

Vector gather_values(const Vector& values, const std::vector<Index>& rows) {
  Vector out(static_cast<Index>(rows.size()));
  for (Index i = 0; i < out.size(); ++i) out[i] = values[rows[static_cast<std::size_t>(i)]];
  return out;
}

double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

// Everything recorded about one method within one repetition.
struct MethodOutcome {
  Vector slopes;
  double intercept = 0.0;
  double d_eff = 0.0;
  double a_eff = 0.0;
  double seconds = 0.0;
};

std::vector<Index> run_method(Method method, const DataMatrix& original, const Matrix& scaled,
                              Index k, Elimination elimination, std::uint64_t seed) {
  switch (method) {
    case Method::Uni: return uniform_select(original.n(), k, seed);
    case Method::Iboss: return iboss_select(original, k);
    case Method::Oss: {
      OssConfig cfg;
      cfg.k = k;
      cfg.elimination = elimination;
      return oss_select(scaled, cfg).indices;
    }
  }
  throw ValidationError("unknown method");
}

MethodOutcome evaluate_method(Method method, const DataMatrix& original, const Matrix& scaled,
                              const Vector& y, Index k, bool fit_interactions,
                              const Vector& design_means, double y_mean, Elimination elimination,
                              std::uint64_t seed) {
  const auto start = std::chrono::steady_clock::now();
  const std::vector<Index> indices = run_method(method, original, scaled, k, elimination, seed);
  const Matrix x_sub = gather_rows(original.values, indices);
  const Vector y_sub = gather_values(y, indices);
  FitResult fit = ols_fit(x_sub, y_sub, fit_interactions);
  fit.intercept = adjusted_intercept(y_mean, design_means, fit.slopes);
  fit.used_adjusted_intercept = true;

  Matrix scaled_sub = gather_rows(scaled, indices);
  if (fit_interactions) {
    Matrix augmented(scaled_sub.rows(), scaled_sub.cols() + scaled_sub.cols() * (scaled_sub.cols() - 1) / 2);
    augmented.leftCols(scaled_sub.cols()) = scaled_sub;
    augmented.rightCols(augmented.cols() - scaled_sub.cols()) = expand_interactions(scaled_sub);
    scaled_sub = std::move(augmented);
  }
  const EfficiencyReport report =
      efficiency_report(information_matrix(scaled_sub), k, scaled_sub.cols());

  MethodOutcome outcome;
  outcome.slopes = std::move(fit.slopes);
  outcome.intercept = fit.intercept;
  outcome.d_eff = report.d_eff;
  outcome.a_eff = report.a_eff;
  outcome.seconds = seconds_since(start);
  return outcome;
}

}  // namespace

std::vector<BenchRow> run_benchmark(const BenchmarkSpec& spec) {
  if (spec.n_grid.empty()) throw ValidationError("benchmark needs a non-empty n grid");
  if (spec.methods.empty()) throw ValidationError("benchmark needs at least one method");
  if (spec.repetitions < 1) throw ValidationError("repetition count T must be at least 1");
  if (spec.p < 1 || spec.k < 1) throw ValidationError("benchmark needs p >= 1 and k >= 1");
  for (const Index n : spec.n_grid) {
    if (spec.k > n) {
      throw ValidationError("k exceeds n (k = " + std::to_string(spec.k) + ", n = " +
                            std::to_string(n) + ")");
    }
  }
  const bool fit_inter = spec.fit_interactions.value_or(spec.model == ModelKind::Interaction);
  const Index n_inter = spec.p * (spec.p - 1) / 2;

  // Reference coefficients for the error aggregation.
  Vector truth(fit_inter ? spec.p + n_inter : spec.p);
  truth.head(spec.p).setConstant(spec.slope_value);
  if (fit_inter) {
    truth.tail(n_inter).setConstant(
        spec.model == ModelKind::Interaction ? spec.interaction_value : 0.0);
  }

  std::vector<BenchRow> rows;
  for (std::size_t grid_index = 0; grid_index < spec.n_grid.size(); ++grid_index) {
    const Index n = spec.n_grid[grid_index];
    const std::size_t n_methods = spec.methods.size();
    const int reps = spec.repetitions;
    std::vector<std::vector<MethodOutcome>> outcomes(
        static_cast<std::size_t>(reps), std::vector<MethodOutcome>(n_methods));

    run_tasks(reps, spec.threads, [&](int t) {
      const std::uint64_t rep_seed =
          derive_stream(derive_stream(spec.seed, static_cast<std::uint64_t>(grid_index)),
                        static_cast<std::uint64_t>(t));
      SyntheticSpec dspec;
      dspec.cov_case = spec.cov_case;
      dspec.n = n;
      dspec.p = spec.p;
      dspec.seed = rep_seed;
      dspec.model = spec.model;
      dspec.beta0 = spec.beta0;
      dspec.slopes = Vector::Constant(spec.p, spec.slope_value);
      if (spec.model == ModelKind::Interaction) {
        dspec.interaction_effects = Vector::Constant(n_inter, spec.interaction_value);
      }
      dspec.noise_variance = spec.noise_variance;

      const DataMatrix data = generate_covariates(dspec);
      const Vector y = generate_response(data, dspec);
      const auto [scaled, transform] = scale_to_unit(data);

      const double y_mean = y.mean();
      Vector design_means(truth.size());
      design_means.head(spec.p) = data.values.colwise().mean();
      if (fit_inter) design_means.tail(n_inter) = interaction_means(data.values);

      for (std::size_t mi = 0; mi < n_methods; ++mi) {
        outcomes[static_cast<std::size_t>(t)][mi] =
            evaluate_method(spec.methods[mi], data, scaled.values, y, spec.k, fit_inter,
                            design_means, y_mean, spec.elimination, rep_seed);
      }
    });

    for (std::size_t mi = 0; mi < n_methods; ++mi) {
      std::vector<Vector> slopes;
      std::vector<double> intercepts;
      double d_sum = 0.0, a_sum = 0.0, sec_sum = 0.0;
      for (int t = 0; t < reps; ++t) {
        const MethodOutcome& o = outcomes[static_cast<std::size_t>(t)][mi];
        slopes.push_back(o.slopes);
        intercepts.push_back(o.intercept);
        d_sum += o.d_eff;
        a_sum += o.a_eff;
        sec_sum += o.seconds;
      }
      BenchRow row;
      row.n = n;
      row.p = spec.p;
      row.k = spec.k;
      row.method = spec.methods[mi];
      row.mse_slopes = empirical_mse(slopes, truth);
      row.mse_intercept = empirical_mse(intercepts, spec.beta0);
      row.d_eff_mean = d_sum / reps;
      row.a_eff_mean = a_sum / reps;
      row.wall_time = sec_sum;
      rows.push_back(std::move(row));
    }
  }
  return rows;
}

std::vector<BenchRow> run_bootstrap(const DataMatrix& data, const BootstrapSpec& spec) {
  validate(data);
  if (!data.response) {
    throw ValidationError("bootstrap requires a response column");
  }
  if (spec.samples < 2) {
    throw ValidationError("bootstrap sample count B must be at least 2");
  }
  if (spec.methods.empty()) {
    throw ValidationError("bootstrap needs at least one method");
  }
  const Index n = data.n();
  if (spec.k > n) {
    throw ValidationError("k exceeds n (k = " + std::to_string(spec.k) + ", n = " +
                          std::to_string(n) + ")");
  }

  // Reference truth: the full-data estimate.
  const FitResult full_fit = ols_fit(data.values, *data.response, false);
  const Vector x_mean_full = data.values.colwise().mean();
  const double y_mean_full = data.response->mean();
  const double intercept_truth = adjusted_intercept(y_mean_full, x_mean_full, full_fit.slopes);

  const std::size_t n_methods = spec.methods.size();
  std::vector<std::vector<MethodOutcome>> outcomes(
      static_cast<std::size_t>(spec.samples), std::vector<MethodOutcome>(n_methods));

  run_tasks(spec.samples, spec.threads, [&](int b) {
    const std::uint64_t boot_seed =
        derive_stream(derive_stream(spec.seed, stream::kBootstrapResample),
                      static_cast<std::uint64_t>(b));
    Rng rng(boot_seed);
    std::vector<Index> resample(static_cast<std::size_t>(n));
    for (auto& r : resample) r = static_cast<Index>(rng.next_below(static_cast<std::uint64_t>(n)));

    DataMatrix boot;
    boot.values = gather_rows(data.values, resample);
    const Vector y = gather_values(*data.response, resample);
    const auto [scaled, transform] = scale_to_unit(boot);
    const Vector design_means = boot.values.colwise().mean();
    const double y_mean = y.mean();

    for (std::size_t mi = 0; mi < n_methods; ++mi) {
      outcomes[static_cast<std::size_t>(b)][mi] =
          evaluate_method(spec.methods[mi], boot, scaled.values, y, spec.k, false, design_means,
                          y_mean, Elimination::Scheduled, boot_seed);
    }
  });

  std::vector<BenchRow> rows;
  for (std::size_t mi = 0; mi < n_methods; ++mi) {
    std::vector<Vector> slopes;
    std::vector<double> intercepts;
    double d_sum = 0.0, a_sum = 0.0, sec_sum = 0.0;
    for (int b = 0; b < spec.samples; ++b) {
      const MethodOutcome& o = outcomes[static_cast<std::size_t>(b)][mi];
      slopes.push_back(o.slopes);
      intercepts.push_back(o.intercept);
      d_sum += o.d_eff;
      a_sum += o.a_eff;
      sec_sum += o.seconds;
    }
    BenchRow row;
    row.n = n;
    row.p = data.p();
    row.k = spec.k;
    row.method = spec.methods[mi];
    row.mse_slopes = empirical_mse(slopes, full_fit.slopes);
    row.mse_intercept = empirical_mse(intercepts, intercept_truth);
    row.d_eff_mean = d_sum / spec.samples;
    row.a_eff_mean = a_sum / spec.samples;
    row.wall_time = sec_sum;
    rows.push_back(std::move(row));
  }
  return rows;
}

void write_table_csv(const std::filesystem::path& path, const std::vector<BenchRow>& rows) {
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw IoError("cannot write " + path.string());
  }
  out << "n,p,k,method,mse_slopes,mse_intercept,d_eff_mean,a_eff_mean,wall_time\n";
  for (const BenchRow& row : rows) {
    out << row.n << ',' << row.p << ',' << row.k << ',' << to_string(row.method) << ','
        << format_double(row.mse_slopes) << ',' << format_double(row.mse_intercept) << ','
        << format_double(row.d_eff_mean) << ',' << format_double(row.a_eff_mean) << ','
        << format_double(row.wall_time) << '\n';
  }
  if (!out) {
    throw IoError("write failed for " + path.string());
  }
}

void write_table_json(const std::filesystem::path& path, const std::vector<BenchRow>& rows) {
  nlohmann::ordered_json table = nlohmann::ordered_json::array();
  for (const BenchRow& row : rows) {
    table.push_back({{"n", row.n},
                     {"p", row.p},
                     {"k", row.k},
                     {"method", to_string(row.method)},
                     {"mse_slopes", row.mse_slopes},
                     {"mse_intercept", row.mse_intercept},
                     {"d_eff_mean", row.d_eff_mean},
                     {"a_eff_mean", row.a_eff_mean},
                     {"wall_time", row.wall_time}});
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw IoError("cannot write " + path.string());
  }
  out << table.dump(2) << '\n';
  if (!out) {
    throw IoError("write failed for " + path.string());
  }
}

std::string table_summary_line(const BenchRow& row) {
  std::string line = "n=" + std::to_string(row.n) + " method=" + to_string(row.method);
  line += " mse_slopes=" + format_double(row.mse_slopes);
  line += " mse_intercept=" + format_double(row.mse_intercept);
  line += " d_eff=" + format_double(row.d_eff_mean);
  line += " a_eff=" + format_double(row.a_eff_mean);
  line += " wall_time=" + format_double(row.wall_time) + "s";
  return line;
}

}  // namespace oss
