#include "oss/types.hpp"

#include <charconv>

namespace oss {

void validate(const DataMatrix& data) {
  if (data.n() < 1 || data.p() < 1) {
    throw ValidationError("data matrix must have at least one row and one column (got " +
                          std::to_string(data.n()) + "x" + std::to_string(data.p()) + ")");
  }
  if (!data.values.allFinite()) {
    throw ValidationError("data matrix contains a non-finite value");
  }
  if (data.response) {
    if (data.response->size() != data.n()) {
      throw ValidationError("response length " + std::to_string(data.response->size()) +
                            " does not match row count " + std::to_string(data.n()));
    }
    if (!data.response->allFinite()) {
      throw ValidationError("response contains a non-finite value");
    }
  }
}

Matrix gather_rows(const Eigen::Ref<const Matrix>& values, const std::vector<Index>& rows) {
  Matrix out(static_cast<Index>(rows.size()), values.cols());
  for (Index i = 0; i < out.rows(); ++i) {
    const Index r = rows[static_cast<std::size_t>(i)];
    if (r < 0 || r >= values.rows()) {
      throw ValidationError("row index " + std::to_string(r) + " out of range [0, " +
                            std::to_string(values.rows()) + ")");
    }
    out.row(i) = values.row(r);
  }
  return out;
}

std::string format_double(double value) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof(buf), value);
  return std::string(buf, res.ptr);
}

}  // namespace oss
