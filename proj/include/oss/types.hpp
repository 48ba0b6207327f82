#pragma once

#include <Eigen/Dense>

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace oss {

// Rows are data points, so the dense storage is row-major: a row view is a
// contiguous span, which the selection inner loops rely on.
using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Vector = Eigen::VectorXd;
using Index = Eigen::Index;

/// Invalid arguments, malformed data, or broken preconditions.
/// The CLI maps this to exit code 2.
class ValidationError : public std::runtime_error {
 public:
  explicit ValidationError(const std::string& what) : std::runtime_error(what) {}
};

/// Filesystem-level failures (missing file, unreadable, write failure).
/// The CLI maps this to exit code 1.
class IoError : public std::runtime_error {
 public:
  explicit IoError(const std::string& what) : std::runtime_error(what) {}
};

/// An n-by-p covariate table, optionally paired with a response vector.
struct DataMatrix {
  Matrix values;                  // n x p, all entries finite
  std::optional<Vector> response; // length n when present

  Index n() const { return values.rows(); }
  Index p() const { return values.cols(); }
};

/// Throws ValidationError if the invariants (n >= 1, p >= 1, finiteness,
/// response length) do not hold.
void validate(const DataMatrix& data);

/// Copies the given rows (in order) into a dense k x p matrix.
Matrix gather_rows(const Eigen::Ref<const Matrix>& values, const std::vector<Index>& rows);

/// Shortest representation that round-trips exactly; keeps written files
/// byte-stable across runs.
std::string format_double(double value);

}  // namespace oss
