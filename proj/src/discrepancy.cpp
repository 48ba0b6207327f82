#include "oss/discrepancy.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>

namespace oss {

void validate(const DiscrepancyConfig& cfg) {
  if (cfg.exponent != 2 && cfg.exponent != 4) {
    throw ValidationError("discrepancy exponent must be 2 or 4, got " +
                          std::to_string(cfg.exponent));
  }
}

double total_discrepancy(const Eigen::Ref<const Matrix>& subsample, const DiscrepancyConfig& cfg) {
  validate(cfg);
  const Index k = subsample.rows();
  const Index p = subsample.cols();
  if (k < 2) {
    throw ValidationError("discrepancy needs at least two rows, got " + std::to_string(k));
  }
  Vector norms = subsample.rowwise().squaredNorm();
  const double pd = static_cast<double>(p);
  double total = 0.0;
  for (Index i = 0; i < k; ++i) {
    const auto row_i = subsample.row(i);
    for (Index j = i + 1; j < k; ++j) {
      int agree = 0;
      for (Index l = 0; l < p; ++l) agree += row_i[l] * subsample(j, l) > 0.0;
      const double base = pd - 0.5 * (norms[i] + norms[j]) + static_cast<double>(agree);
      const double sq = base * base;
      total += cfg.exponent == 4 ? sq * sq : sq;
    }
  }
  return total;
}

double oa_lower_bound(Index k, Index p) {
  if (k < 1 || p < 1) {
    throw ValidationError("bound requires k >= 1 and p >= 1");
  }
  const double kd = static_cast<double>(k);
  const double pd = static_cast<double>(p);
  return (kd * kd * pd * (pd + 1.0) - 4.0 * kd * pd * pd) / 8.0;
}

bool is_orthogonal_array(const Eigen::Ref<const Matrix>& subsample, double tol) {
  const Index k = subsample.rows();
  const Index p = subsample.cols();
  if (k < 1 || p < 1 || k % 4 != 0) return false;

  // Snap entries to +/-1; any entry outside the tolerance band disqualifies.
  Eigen::Matrix<int, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> signs(k, p);
  for (Index i = 0; i < k; ++i) {
    for (Index j = 0; j < p; ++j) {
      const double v = subsample(i, j);
      if (std::abs(v - 1.0) <= tol) signs(i, j) = 1;
      else if (std::abs(v + 1.0) <= tol) signs(i, j) = -1;
      else return false;
    }
  }
  // Strength 2 implies sign balance within every single column; checking it
  // directly keeps the single-column case consistent with the bound equality.
  const Index half = k / 2;
  for (Index j = 0; j < p; ++j) {
    Index positive = 0;
    for (Index i = 0; i < k; ++i) positive += signs(i, j) > 0;
    if (positive != half) return false;
  }
  if (p == 1) return true;

  const Index quarter = k / 4;
  for (Index a = 0; a < p; ++a) {
    for (Index b = a + 1; b < p; ++b) {
      std::array<Index, 4> counts{0, 0, 0, 0};
      for (Index i = 0; i < k; ++i) {
        const int cell = (signs(i, a) > 0 ? 2 : 0) + (signs(i, b) > 0 ? 1 : 0);
        ++counts[static_cast<std::size_t>(cell)];
      }
      for (const Index c : counts)
        if (c != quarter) return false;
    }
  }
  return true;
}

namespace {

std::uint64_t binomial_capped(Index n, Index k, std::uint64_t cap) {
  if (k < 0 || k > n) return 0;
  k = std::min(k, n - k);
  double value = 1.0;
  for (Index i = 1; i <= k; ++i) {
    value *= static_cast<double>(n - k + i) / static_cast<double>(i);
    if (value > 2.0 * static_cast<double>(cap)) return cap + 1;
  }
  return static_cast<std::uint64_t>(std::llround(value));
}

}  // namespace

std::pair<std::vector<Index>, double> brute_force_min_discrepancy(
    const Eigen::Ref<const Matrix>& values, Index k, const DiscrepancyConfig& cfg,
    std::uint64_t max_subsets) {
  validate(cfg);
  const Index n = values.rows();
  if (k < 2 || k > n) {
    throw ValidationError("exhaustive search requires 2 <= k <= n");
  }
  if (binomial_capped(n, k, max_subsets) > max_subsets) {
    throw ValidationError("exhaustive search over C(" + std::to_string(n) + "," +
                          std::to_string(k) + ") subsets exceeds the cap of " +
                          std::to_string(max_subsets));
  }

  std::vector<Index> combo(static_cast<std::size_t>(k));
  for (Index i = 0; i < k; ++i) combo[static_cast<std::size_t>(i)] = i;

  std::vector<Index> best;
  double best_value = std::numeric_limits<double>::infinity();
  Matrix rows(k, values.cols());
  while (true) {
    for (Index i = 0; i < k; ++i) rows.row(i) = values.row(combo[static_cast<std::size_t>(i)]);
    const double value = total_discrepancy(rows, cfg);
    // Lexicographic enumeration order makes strict improvement the tie-break.
    if (value < best_value) {
      best_value = value;
      best = combo;
    }
    Index pos = k - 1;
    while (pos >= 0 && combo[static_cast<std::size_t>(pos)] == n - k + pos) --pos;
    if (pos < 0) break;
    ++combo[static_cast<std::size_t>(pos)];
    for (Index i = pos + 1; i < k; ++i)
      combo[static_cast<std::size_t>(i)] = combo[static_cast<std::size_t>(i - 1)] + 1;
  }
  return {best, best_value};
}

}  // namespace oss
