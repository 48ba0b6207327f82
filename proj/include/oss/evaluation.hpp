#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "oss/dataio.hpp"
#include "oss/select.hpp"
#include "oss/types.hpp"

namespace oss {

enum class Method { Uni, Iboss, Oss };

std::string to_string(Method method);
Method parse_method(const std::string& name);

/// Least-squares estimates for an intercept-augmented design.
struct FitResult {
  double intercept = 0.0;
  Vector slopes;  // p entries, or p + p(p-1)/2 when interactions were fitted
  bool used_adjusted_intercept = false;
};

struct EfficiencyReport {
  double d_eff = 0.0;
  double a_eff = 0.0;
  double log_det_ms = 0.0;
  double trace_ms_inv = 0.0;
};

/// OLS on [1 | X | interactions?] via column-pivoted QR. Requires more rows
/// than design columns and full column rank; a rank-deficient design is
/// reported with the name of a dependent term.
FitResult ols_fit(const Eigen::Ref<const Matrix>& x_rows, const Eigen::Ref<const Vector>& y,
                  bool with_interactions = false);

/// Intercept recovered from full-sample means: y_bar - x_bar . slopes.
double adjusted_intercept(double y_bar, const Eigen::Ref<const Vector>& x_bar,
                          const Eigen::Ref<const Vector>& slopes);

/// Design term names: "intercept", "x1".."xp", then "x1:x2".. when requested.
std::vector<std::string> design_term_names(Index p, bool with_interactions);

/// M = D^T D for the intercept-augmented design D = [1 | rows]. Exactly
/// symmetric by construction.
Matrix information_matrix(const Eigen::Ref<const Matrix>& scaled_rows);

/// det(M)^(1/(p+1)) / k, evaluated through the log-determinant. Zero for a
/// singular (or non-positive-definite) M.
double d_efficiency(const Eigen::Ref<const Matrix>& m, Index k, Index p);

/// (p+1) / (k * trace(M^-1)). Zero for a singular M.
double a_efficiency(const Eigen::Ref<const Matrix>& m, Index k, Index p);

/// Both efficiencies plus the underlying log-determinant and inverse trace.
EfficiencyReport efficiency_report(const Eigen::Ref<const Matrix>& m, Index k, Index p);

/// Mean squared Euclidean distance between each estimate and the truth.
double empirical_mse(const std::vector<Vector>& estimates, const Eigen::Ref<const Vector>& truth);
double empirical_mse(const std::vector<double>& estimates, double truth);

/// Simulation grid: data are drawn from the named covariate case with unit
/// coefficients (configurable below), subsampled by each method, and fitted
/// on original-scale covariates with the intercept recovered from full-sample
/// means. Efficiencies are computed on the scaled copy.
struct BenchmarkSpec {
  CovariateCase cov_case = CovariateCase::Uniform;
  std::vector<Index> n_grid;
  Index p = 0;
  Index k = 0;
  int repetitions = 1;  // T
  std::vector<Method> methods = {Method::Uni, Method::Iboss, Method::Oss};
  ModelKind model = ModelKind::FirstOrder;
  std::optional<bool> fit_interactions;  // defaults to (model == Interaction)
  Elimination elimination = Elimination::Scheduled;
  std::uint64_t seed = 0;
  int threads = 0;
  double beta0 = 1.0;
  double slope_value = 1.0;
  double interaction_value = 1.0;
  double noise_variance = 9.0;
};

/// One output row per (n, method).
struct BenchRow {
  Index n = 0;
  Index p = 0;
  Index k = 0;
  Method method = Method::Uni;
  double mse_slopes = 0.0;
  double mse_intercept = 0.0;
  double d_eff_mean = 0.0;
  double a_eff_mean = 0.0;
  double wall_time = 0.0;  // seconds spent selecting + fitting for this row
};

/// Runs the grid; repetitions may execute concurrently but every numeric
/// column is deterministic per seed (wall_time is measured, not derived).
std::vector<BenchRow> run_benchmark(const BenchmarkSpec& spec);

/// Bootstrap study on a real dataset: B resamples of size n with replacement;
/// each method selects k points from the resample and is fitted on them. MSEs
/// are taken against the full-data OLS estimate.
struct BootstrapSpec {
  Index k = 0;
  int samples = 0;  // B >= 2
  std::vector<Method> methods = {Method::Uni, Method::Iboss, Method::Oss};
  std::uint64_t seed = 0;
  int threads = 0;
};

std::vector<BenchRow> run_bootstrap(const DataMatrix& data, const BootstrapSpec& spec);

/// CSV with header n,p,k,method,mse_slopes,mse_intercept,d_eff_mean,
/// a_eff_mean,wall_time; the JSON variant is an array of objects with the
/// same field names.
void write_table_csv(const std::filesystem::path& path, const std::vector<BenchRow>& rows);
void write_table_json(const std::filesystem::path& path, const std::vector<BenchRow>& rows);

std::string table_summary_line(const BenchRow& row);

}  // namespace oss
