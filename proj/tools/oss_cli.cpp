// Command-line surface for the orthogonal subsampling toolkit.
//
// Exit codes: 0 success, 1 I/O failure, 2 validation failure.

#include <charconv>
#include <chrono>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "oss/baselines.hpp"
#include "oss/dataio.hpp"
#include "oss/discrepancy.hpp"
#include "oss/evaluation.hpp"
#include "oss/select.hpp"
#include "oss/types.hpp"

namespace {

using oss::Index;

struct InputOptions {
  std::string path;
  bool has_header = false;
  std::string response_col;  // empty = none

  std::optional<std::string> response() const {
    return response_col.empty() ? std::nullopt : std::make_optional(response_col);
  }
};

void add_input_options(CLI::App* cmd, InputOptions& in, bool response_required = false) {
  cmd->add_option("--input", in.path, "input CSV file")->required();
  cmd->add_flag("--header", in.has_header, "first line of the input is a header");
  auto* opt = cmd->add_option("--response-col", in.response_col,
                              "response column (header name or 0-based index)");
  if (response_required) opt->required();
}

std::vector<Index> parse_count_list(const std::string& text, const std::string& flag) {
  std::vector<Index> values;
  std::size_t start = 0;
  while (start <= text.size()) {
    const std::size_t comma = text.find(',', start);
    const std::string item =
        text.substr(start, comma == std::string::npos ? std::string::npos : comma - start);
    Index value = 0;
    const auto res = std::from_chars(item.data(), item.data() + item.size(), value);
    if (res.ec != std::errc{} || res.ptr != item.data() + item.size() || value < 1) {
      throw oss::ValidationError(flag + ": \"" + item + "\" is not a positive integer");
    }
    values.push_back(value);
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  if (values.empty()) throw oss::ValidationError(flag + ": empty list");
  return values;
}

std::vector<oss::Method> parse_method_list(const std::string& text) {
  std::vector<oss::Method> methods;
  std::size_t start = 0;
  while (start <= text.size()) {
    const std::size_t comma = text.find(',', start);
    methods.push_back(oss::parse_method(
        text.substr(start, comma == std::string::npos ? std::string::npos : comma - start)));
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  return methods;
}

void write_indices(const std::string& path, const std::vector<Index>& indices) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw oss::IoError("cannot write " + path);
  for (const Index idx : indices) out << idx << '\n';
  if (!out) throw oss::IoError("write failed for " + path);
}

std::vector<Index> read_indices(const std::string& path, Index n) {
  std::ifstream in(path);
  if (!in) throw oss::IoError("cannot open " + path);
  std::vector<Index> indices;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    Index value = 0;
    const auto res = std::from_chars(line.data(), line.data() + line.size(), value);
    if (res.ec != std::errc{} || res.ptr != line.data() + line.size()) {
      throw oss::ValidationError(path + ":" + std::to_string(line_no) +
                                 ": \"" + line + "\" is not an index");
    }
    if (value < 0 || value >= n) {
      throw oss::ValidationError(path + ":" + std::to_string(line_no) + ": index " +
                                 std::to_string(value) + " out of range [0, " +
                                 std::to_string(n) + ")");
    }
    indices.push_back(value);
  }
  if (indices.empty()) throw oss::ValidationError(path + ": no indices");
  return indices;
}

void write_json_file(const std::string& path, const nlohmann::ordered_json& doc) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw oss::IoError("cannot write " + path);
  out << doc.dump(2) << '\n';
  if (!out) throw oss::IoError("write failed for " + path);
}

// ---------------------------------------------------------------- scale ----

struct ScaleArgs {
  InputOptions in;
  std::string output;
  std::string transform_path;
};

int run_scale(const ScaleArgs& args) {
  std::vector<std::string> names;
  const oss::DataMatrix data = oss::load_csv(args.in.path, args.in.has_header,
                                             args.in.response(), &names);
  const auto [scaled, transform] = oss::scale_to_unit(data);
  oss::write_csv(args.output, scaled, names);
  if (!args.transform_path.empty()) {
    nlohmann::ordered_json doc;
    doc["col_min"] = std::vector<double>(transform.col_min.begin(), transform.col_min.end());
    doc["col_max"] = std::vector<double>(transform.col_max.begin(), transform.col_max.end());
    write_json_file(args.transform_path, doc);
  }
  return 0;
}

// ------------------------------------------------------------------ gen ----

struct GenArgs {
  std::string spec_path;
  std::string output;
  std::optional<std::uint64_t> seed;
  std::optional<Index> n;
};

int run_gen(const GenArgs& args) {
  oss::SyntheticSpec spec = oss::parse_spec_file(args.spec_path);
  if (args.seed) spec.seed = *args.seed;
  if (args.n) spec.n = *args.n;
  oss::DataMatrix data = oss::generate_covariates(spec);
  data.response = oss::generate_response(data, spec);
  std::vector<std::string> names;
  for (Index j = 1; j <= spec.p; ++j) names.push_back("x" + std::to_string(j));
  names.emplace_back("y");
  oss::write_csv(args.output, data, names);
  return 0;
}

// --------------------------------------------------------------- sample ----

struct SampleArgs {
  InputOptions in;
  std::string method = "oss";
  Index k = 0;
  Index g = 1;
  int exponent = 2;
  bool no_elimination = false;
  std::uint64_t seed = 0;
  int threads = 0;
  std::string output;
};

int run_sample(const SampleArgs& args) {
  const oss::DataMatrix data = oss::load_csv(args.in.path, args.in.has_header, args.in.response());
  const oss::Method method = oss::parse_method(args.method);
  if (args.k > data.n()) {
    throw oss::ValidationError("k exceeds n (k = " + std::to_string(args.k) + ", n = " +
                               std::to_string(data.n()) + ")");
  }

  const auto start = std::chrono::steady_clock::now();
  std::vector<Index> indices;
  std::optional<double> discrepancy;
  std::vector<Index> batch_sizes;
  if (method == oss::Method::Oss) {
    const auto [scaled, transform] = oss::scale_to_unit(data);
    oss::OssConfig cfg;
    cfg.k = args.k;
    cfg.exponent = args.exponent;
    cfg.batches = static_cast<int>(args.g);
    cfg.elimination = args.no_elimination ? oss::Elimination::None : oss::Elimination::Scheduled;
    cfg.seed = args.seed;
    cfg.threads = args.threads;
    oss::SubsampleResult result = oss::oss_select_batched(scaled.values, cfg);
    indices = std::move(result.indices);
    discrepancy = result.discrepancy;
    batch_sizes = std::move(result.batch_sizes);
  } else if (method == oss::Method::Uni) {
    indices = oss::uniform_select(data.n(), args.k, args.seed);
    batch_sizes = {args.k};
  } else {
    indices = oss::iboss_select(data, args.k);
    batch_sizes = {args.k};
  }
  const double elapsed_ms =
      std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();

  write_indices(args.output, indices);
  nlohmann::ordered_json sidecar;
  sidecar["method"] = oss::to_string(method);
  sidecar["k"] = args.k;
  sidecar["g"] = args.g;
  sidecar["batch_sizes"] = batch_sizes;
  if (discrepancy) sidecar["discrepancy"] = *discrepancy;
  sidecar["wall_time_ms"] = elapsed_ms;
  write_json_file(args.output + ".json", sidecar);
  return 0;
}

// ------------------------------------------------------------------ fit ----

struct FitArgs {
  InputOptions in;
  std::string indices_path;
  bool interactions = false;
  bool no_adjusted_intercept = false;
  std::string output;
};

int run_fit(const FitArgs& args) {
  const oss::DataMatrix data = oss::load_csv(args.in.path, args.in.has_header, args.in.response());
  if (!data.response) {
    throw oss::ValidationError("fit requires --response-col");
  }
  const std::vector<Index> indices = read_indices(args.indices_path, data.n());
  const oss::Matrix x_sub = oss::gather_rows(data.values, indices);
  oss::Vector y_sub(static_cast<Index>(indices.size()));
  for (Index i = 0; i < y_sub.size(); ++i)
    y_sub[i] = (*data.response)[indices[static_cast<std::size_t>(i)]];

  oss::FitResult fit = oss::ols_fit(x_sub, y_sub, args.interactions);
  if (!args.no_adjusted_intercept) {
    oss::Vector design_means(fit.slopes.size());
    design_means.head(data.p()) = data.values.colwise().mean();
    if (args.interactions) design_means.tail(design_means.size() - data.p()) =
        oss::interaction_means(data.values);
    fit.intercept = oss::adjusted_intercept(data.response->mean(), design_means, fit.slopes);
    fit.used_adjusted_intercept = true;
  }

  const auto names = oss::design_term_names(data.p(), args.interactions);
  std::ofstream out(args.output, std::ios::binary);
  if (!out) throw oss::IoError("cannot write " + args.output);
  out << "term,estimate\n";
  out << names[0] << ',' << oss::format_double(fit.intercept) << '\n';
  for (Index i = 0; i < fit.slopes.size(); ++i)
    out << names[static_cast<std::size_t>(i + 1)] << ',' << oss::format_double(fit.slopes[i])
        << '\n';
  if (!out) throw oss::IoError("write failed for " + args.output);
  return 0;
}

// ------------------------------------------------------------- evaluate ----

struct EvaluateArgs {
  InputOptions in;
  std::string indices_path;
  int exponent = 2;
  std::string output;  // empty = stdout
};

int run_evaluate(const EvaluateArgs& args) {
  const oss::DataMatrix data = oss::load_csv(args.in.path, args.in.has_header, args.in.response());
  const std::vector<Index> indices = read_indices(args.indices_path, data.n());
  const auto [scaled, transform] = oss::scale_to_unit(data);
  const oss::Matrix subsample = oss::gather_rows(scaled.values, indices);
  const Index k = subsample.rows();
  const oss::EfficiencyReport report =
      oss::efficiency_report(oss::information_matrix(subsample), k, data.p());

  nlohmann::ordered_json doc;
  doc["k"] = k;
  doc["p"] = data.p();
  doc["d_eff"] = report.d_eff;
  doc["a_eff"] = report.a_eff;
  doc["log_det_ms"] = report.log_det_ms;
  doc["trace_ms_inv"] = report.trace_ms_inv;
  if (k >= 2) {
    doc["discrepancy"] = oss::total_discrepancy(subsample, oss::DiscrepancyConfig{args.exponent});
    if (args.exponent == 2) doc["discrepancy_lower_bound"] = oss::oa_lower_bound(k, data.p());
  }
  if (args.output.empty()) {
    std::cout << doc.dump(2) << '\n';
  } else {
    write_json_file(args.output, doc);
  }
  return 0;
}

// ---------------------------------------------------------------- bench ----

struct BenchArgs {
  std::string case_name = "uniform";
  std::string n_list;
  Index p = 0;
  Index k = 0;
  int repetitions = 0;
  std::string methods = "uni,iboss,oss";
  bool interactions = false;
  bool no_elimination = false;
  std::uint64_t seed = 0;
  int threads = 0;
  std::string output;
  std::string json_output;
};

oss::CovariateCase parse_case(const std::string& name) {
  if (name == "uniform") return oss::CovariateCase::Uniform;
  if (name == "normal") return oss::CovariateCase::Normal;
  if (name == "truncated-normal") return oss::CovariateCase::TruncatedNormal;
  throw oss::ValidationError("unknown case \"" + name +
                             "\" (expected uniform, normal, or truncated-normal)");
}

int run_bench(const BenchArgs& args) {
  oss::BenchmarkSpec spec;
  spec.cov_case = parse_case(args.case_name);
  spec.n_grid = parse_count_list(args.n_list, "--n");
  spec.p = args.p;
  spec.k = args.k;
  spec.repetitions = args.repetitions;
  spec.methods = parse_method_list(args.methods);
  spec.model = args.interactions ? oss::ModelKind::Interaction : oss::ModelKind::FirstOrder;
  spec.elimination =
      args.no_elimination ? oss::Elimination::None : oss::Elimination::Scheduled;
  spec.seed = args.seed;
  spec.threads = args.threads;
  const std::vector<oss::BenchRow> rows = oss::run_benchmark(spec);
  if (!args.output.empty()) oss::write_table_csv(args.output, rows);
  if (!args.json_output.empty()) oss::write_table_json(args.json_output, rows);
  for (const auto& row : rows) std::cout << oss::table_summary_line(row) << '\n';
  return 0;
}

// ------------------------------------------------------------ bootstrap ----

struct BootstrapArgs {
  InputOptions in;
  Index k = 0;
  int samples = 0;
  std::string methods = "uni,iboss,oss";
  std::uint64_t seed = 0;
  int threads = 0;
  std::string output;
  std::string json_output;
};

int run_bootstrap_cmd(const BootstrapArgs& args) {
  const oss::DataMatrix data = oss::load_csv(args.in.path, args.in.has_header, args.in.response());
  oss::BootstrapSpec spec;
  spec.k = args.k;
  spec.samples = args.samples;
  spec.methods = parse_method_list(args.methods);
  spec.seed = args.seed;
  spec.threads = args.threads;
  const std::vector<oss::BenchRow> rows = oss::run_bootstrap(data, spec);
  if (!args.output.empty()) oss::write_table_csv(args.output, rows);
  if (!args.json_output.empty()) oss::write_table_json(args.json_output, rows);
  for (const auto& row : rows) std::cout << oss::table_summary_line(row) << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"orthogonal subsampling toolkit"};
  app.require_subcommand(1);

  ScaleArgs scale_args;
  auto* scale_cmd = app.add_subcommand("scale", "scale covariates to [-1, 1]");
  add_input_options(scale_cmd, scale_args.in);
  scale_cmd->add_option("--output", scale_args.output, "scaled CSV path")->required();
  scale_cmd->add_option("--transform", scale_args.transform_path,
                        "write the per-column min/max map as JSON");

  GenArgs gen_args;
  auto* gen_cmd = app.add_subcommand("gen", "generate a synthetic dataset from a spec file");
  gen_cmd->add_option("--spec", gen_args.spec_path, "key=value spec file")->required();
  gen_cmd->add_option("--output", gen_args.output, "output CSV path")->required();
  std::uint64_t gen_seed = 0;
  Index gen_n = 0;
  auto* gen_seed_opt = gen_cmd->add_option("--seed", gen_seed, "override the spec's seed");
  auto* gen_n_opt = gen_cmd->add_option("--n", gen_n, "override the spec's row count");

  SampleArgs sample_args;
  auto* sample_cmd = app.add_subcommand("sample", "select a subsample of k rows");
  add_input_options(sample_cmd, sample_args.in);
  sample_cmd->add_option("--method", sample_args.method, "oss, uni, or iboss")
      ->default_val("oss");
  sample_cmd->add_option("--k", sample_args.k, "subsample size")->required();
  sample_cmd->add_option("--g", sample_args.g, "number of disjoint batches (oss)")
      ->default_val(1);
  sample_cmd->add_option("--exponent", sample_args.exponent, "pairwise penalty exponent (2 or 4)")
      ->default_val(2);
  sample_cmd->add_flag("--no-elimination", sample_args.no_elimination,
                       "keep every candidate at every step (small-p studies)");
  sample_cmd->add_option("--seed", sample_args.seed, "random seed")->default_val(0);
  sample_cmd->add_option("--threads", sample_args.threads, "worker threads (0 = hardware)")
      ->default_val(0);
  sample_cmd->add_option("--output", sample_args.output, "index file path")->required();

  FitArgs fit_args;
  auto* fit_cmd = app.add_subcommand("fit", "least-squares fit on a selected subsample");
  add_input_options(fit_cmd, fit_args.in, /*response_required=*/true);
  fit_cmd->add_option("--indices", fit_args.indices_path, "index file from `sample`")->required();
  fit_cmd->add_flag("--interactions", fit_args.interactions, "include pairwise products");
  fit_cmd->add_flag("--no-adjusted-intercept", fit_args.no_adjusted_intercept,
                    "keep the subsample regression intercept");
  fit_cmd->add_option("--output", fit_args.output, "coefficient CSV path")->required();

  EvaluateArgs eval_args;
  auto* eval_cmd = app.add_subcommand("evaluate", "efficiency report for a selected subsample");
  add_input_options(eval_cmd, eval_args.in);
  eval_cmd->add_option("--indices", eval_args.indices_path, "index file")->required();
  eval_cmd->add_option("--exponent", eval_args.exponent, "discrepancy exponent (2 or 4)")
      ->default_val(2);
  eval_cmd->add_option("--output", eval_args.output, "JSON output path (default stdout)");

  BenchArgs bench_args;
  auto* bench_cmd = app.add_subcommand("bench", "simulation benchmark over an n grid");
  bench_cmd->add_option("--case", bench_args.case_name,
                        "uniform, normal, or truncated-normal")->default_val("uniform");
  bench_cmd->add_option("--n", bench_args.n_list, "comma-separated full sample sizes")
      ->required();
  bench_cmd->add_option("--p", bench_args.p, "covariate count")->required();
  bench_cmd->add_option("--k", bench_args.k, "subsample size")->required();
  bench_cmd->add_option("--T", bench_args.repetitions, "repetitions per grid point")->required();
  bench_cmd->add_option("--methods", bench_args.methods, "comma-separated subset of uni,iboss,oss")
      ->default_val("uni,iboss,oss");
  bench_cmd->add_flag("--interactions", bench_args.interactions,
                      "generate and fit the interaction model");
  bench_cmd->add_flag("--no-elimination", bench_args.no_elimination,
                      "run the subsampler without candidate elimination");
  bench_cmd->add_option("--seed", bench_args.seed, "random seed")->default_val(0);
  bench_cmd->add_option("--threads", bench_args.threads, "worker threads (0 = hardware)")
      ->default_val(0);
  bench_cmd->add_option("--output", bench_args.output, "table CSV path");
  bench_cmd->add_option("--json", bench_args.json_output, "table JSON path");

  BootstrapArgs boot_args;
  auto* boot_cmd = app.add_subcommand("bootstrap", "bootstrap comparison on a real dataset");
  add_input_options(boot_cmd, boot_args.in, /*response_required=*/true);
  boot_cmd->add_option("--k", boot_args.k, "subsample size")->required();
  boot_cmd->add_option("--B", boot_args.samples, "bootstrap sample count")->required();
  boot_cmd->add_option("--methods", boot_args.methods, "comma-separated subset of uni,iboss,oss")
      ->default_val("uni,iboss,oss");
  boot_cmd->add_option("--seed", boot_args.seed, "random seed")->default_val(0);
  boot_cmd->add_option("--threads", boot_args.threads, "worker threads (0 = hardware)")
      ->default_val(0);
  boot_cmd->add_option("--output", boot_args.output, "table CSV path");
  boot_cmd->add_option("--json", boot_args.json_output, "table JSON path");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (*scale_cmd) return run_scale(scale_args);
    if (*gen_cmd) {
      if (gen_seed_opt->count()) gen_args.seed = gen_seed;
      if (gen_n_opt->count()) gen_args.n = gen_n;
      return run_gen(gen_args);
    }
    if (*sample_cmd) return run_sample(sample_args);
    if (*fit_cmd) return run_fit(fit_args);
    if (*eval_cmd) return run_evaluate(eval_args);
    if (*bench_cmd) return run_bench(bench_args);
    if (*boot_cmd) return run_bootstrap_cmd(boot_args);
  } catch (const oss::IoError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  } catch (const oss::ValidationError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
