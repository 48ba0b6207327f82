#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "oss/types.hpp"

namespace oss {

/// Per-column affine map between original covariate ranges and [-1, 1].
struct ScalingTransform {
  Vector col_min;  // length p
  Vector col_max;  // length p, col_min[j] <= col_max[j]

  Index cols() const { return col_min.size(); }

  /// x' = 2 (x - min) / (max - min) - 1, column-wise.
  Matrix apply(const Eigen::Ref<const Matrix>& values) const;
  /// Inverse map; round-trips within 1e-12 relative error.
  Matrix invert(const Eigen::Ref<const Matrix>& scaled) const;
};

enum class CovariateCase { Uniform, Normal, TruncatedNormal };
enum class ModelKind { FirstOrder, Interaction };

/// Recipe for a synthetic regression dataset.
struct SyntheticSpec {
  CovariateCase cov_case = CovariateCase::Uniform;
  Index n = 0;
  Index p = 0;
  std::uint64_t seed = 0;
  ModelKind model = ModelKind::FirstOrder;
  double beta0 = 0.0;
  Vector slopes;                          // length p
  std::optional<Vector> interaction_effects;  // length p(p-1)/2 iff model == Interaction
  double noise_variance = 0.0;            // sigma^2 >= 0
};

/// Throws ValidationError when the spec's invariants do not hold.
void validate(const SyntheticSpec& spec);

/// Reads a numeric CSV. `response_col` selects one column (by header name, or
/// by 0-based index given as digits) as the response; the remaining columns
/// become covariates in file order. Cells must parse as finite numbers.
/// When `names_out` is given it receives the covariate column names (response
/// name last, if selected); empty for headerless files.
DataMatrix load_csv(const std::filesystem::path& path, bool has_header,
                    const std::optional<std::string>& response_col = std::nullopt,
                    std::vector<std::string>* names_out = nullptr);

/// Writes covariates (and the response, when present, as the last column).
/// `header` supplies column names; empty means no header line. Values are
/// emitted in shortest round-trip form, so written files are byte-stable.
void write_csv(const std::filesystem::path& path, const DataMatrix& data,
               const std::vector<std::string>& header = {});

/// Column-wise map onto [-1, 1]; every scaled column attains both endpoints
/// exactly. A constant column is an error (it carries no slope information
/// and the map would be undefined).
std::pair<DataMatrix, ScalingTransform> scale_to_unit(const DataMatrix& data);

/// Draws the covariate table for `spec`:
///   Uniform          i.i.d. entries on (-1, 1);
///   Normal           rows i.i.d. N(0, S), S with unit diagonal and 0.5
///                    off-diagonal;
///   TruncatedNormal  Normal rows redrawn until all components lie in [-5, 5].
/// Bitwise reproducible for a fixed (case, n, p, seed).
DataMatrix generate_covariates(const SyntheticSpec& spec);

/// Draws y = beta0 + X b1 (+ interaction terms) + eps with eps i.i.d.
/// N(0, noise_variance). Uses a child stream of spec.seed distinct from the
/// covariate stream.
Vector generate_response(const DataMatrix& data, const SyntheticSpec& spec);

/// All p(p-1)/2 pairwise product columns, ordered (1,2), (1,3), ..., (p-1,p).
Matrix expand_interactions(const Eigen::Ref<const Matrix>& values);

/// Mean of every interaction column without materialising the expansion.
Vector interaction_means(const Eigen::Ref<const Matrix>& values);

/// Parses a flat key=value file describing a SyntheticSpec. Recognised keys:
/// case, n, p, seed, model, beta0, sigma2, slopes, interactions. `slopes` and
/// `interactions` accept either a comma-separated list or a single value that
/// is broadcast. Lines starting with '#' are comments.
SyntheticSpec parse_spec_file(const std::filesystem::path& path);

}  // namespace oss
