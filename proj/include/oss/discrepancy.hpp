#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "oss/types.hpp"

namespace oss {

/// Exponent of the pairwise penalty. 2 targets strength-2 balance (first-order
/// models); 4 targets strength-4 balance (models with two-factor interactions).
struct DiscrepancyConfig {
  int exponent = 2;  // 2 or 4
};

void validate(const DiscrepancyConfig& cfg);

/// Number of coordinates where u and v have strictly the same sign
/// (u_l * v_l > 0). A zero in either row never counts.
template <typename DerivedU, typename DerivedV>
int sign_agreement(const Eigen::MatrixBase<DerivedU>& u, const Eigen::MatrixBase<DerivedV>& v) {
  if (u.size() != v.size()) {
    throw ValidationError("sign_agreement: length mismatch (" + std::to_string(u.size()) +
                          " vs " + std::to_string(v.size()) + ")");
  }
  return static_cast<int>((u.derived().array() * v.derived().array() > 0.0).count());
}

/// Pairwise penalty [p - |u|^2/2 - |v|^2/2 + sign_agreement(u, v)]^exponent.
/// Non-negative whenever both rows lie in [-1, 1]^p.
template <typename DerivedU, typename DerivedV>
double pair_loss(const Eigen::MatrixBase<DerivedU>& u, const Eigen::MatrixBase<DerivedV>& v,
                 const DiscrepancyConfig& cfg = {}) {
  const double p = static_cast<double>(u.size());
  // The norm terms are grouped commutatively so the loss is bitwise symmetric
  // in its arguments; the selection loop uses the same grouping.
  const double base = p - 0.5 * (u.derived().squaredNorm() + v.derived().squaredNorm()) +
                      static_cast<double>(sign_agreement(u, v));
  const double sq = base * base;
  return cfg.exponent == 4 ? sq * sq : sq;
}

/// Sum of pair_loss over all unordered row pairs of a k x p matrix, k >= 2.
/// Accumulated in row-major pair order so the result is bitwise reproducible.
double total_discrepancy(const Eigen::Ref<const Matrix>& subsample,
                         const DiscrepancyConfig& cfg = {});

/// (k^2 p (p+1) - 4 k p^2) / 8: the exact lower bound of the exponent-2
/// discrepancy over [-1, 1]^p, attained precisely by two-level orthogonal
/// arrays. May be negative for small k; returned as stated (the bound is
/// simply vacuous there).
double oa_lower_bound(Index k, Index p);

/// True iff every entry is within `tol` of +/-1 and, after snapping to signs,
/// each of the four ordered sign pairs appears exactly k/4 times in every
/// column pair. Returns false when k is not a multiple of 4.
bool is_orthogonal_array(const Eigen::Ref<const Matrix>& subsample, double tol = 1e-9);

/// Exhaustive minimiser of total_discrepancy over all k-subsets of the rows.
/// Test oracle only: refuses instances with more than `max_subsets`
/// combinations. Ties broken toward the lexicographically smallest index set.
std::pair<std::vector<Index>, double> brute_force_min_discrepancy(
    const Eigen::Ref<const Matrix>& values, Index k, const DiscrepancyConfig& cfg = {},
    std::uint64_t max_subsets = 1000000);

}  // namespace oss
