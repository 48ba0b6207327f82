#pragma once

#include <cstdint>
#include <vector>

#include "oss/types.hpp"

namespace oss {

/// k distinct indices from {0, ..., n-1}, uniform without replacement,
/// in draw order. Deterministic per seed.
std::vector<Index> uniform_select(Index n, Index k, std::uint64_t seed);

/// Extreme-value subsampling: sweeping the covariates in order, takes the
/// floor(k / (2p)) not-yet-chosen rows with the smallest values and as many
/// with the largest from each column; any remainder is filled by continuing
/// the sweep one extreme at a time, alternating smallest/largest. Rows already
/// chosen via an earlier column are skipped in favour of the next most extreme
/// value. Deterministic (ties broken by row index).
std::vector<Index> iboss_select(const DataMatrix& data, Index k);

}  // namespace oss
