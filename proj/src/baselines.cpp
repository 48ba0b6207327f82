#include "oss/baselines.hpp"

#include <algorithm>
#include <numeric>

#include "oss/rng.hpp"

namespace oss {

std::vector<Index> uniform_select(Index n, Index k, std::uint64_t seed) {
  if (k < 1 || n < 1) {
    throw ValidationError("selection requires n >= 1 and k >= 1");
  }
  if (k > n) {
    throw ValidationError("k exceeds n (k = " + std::to_string(k) + ", n = " + std::to_string(n) +
                          ")");
  }
  std::vector<Index> pool(static_cast<std::size_t>(n));
  std::iota(pool.begin(), pool.end(), Index{0});
  Rng rng(derive_stream(seed, stream::kUniformSelect));
  // Partial Fisher-Yates: the first k slots are the draw, in draw order.
  for (Index i = 0; i < k; ++i) {
    const Index j = i + static_cast<Index>(rng.next_below(static_cast<std::uint64_t>(n - i)));
    std::swap(pool[static_cast<std::size_t>(i)], pool[static_cast<std::size_t>(j)]);
  }
  pool.resize(static_cast<std::size_t>(k));
  return pool;
}

namespace {

// Rows ordered by extremeness in one column, most extreme first. Only the
// leading `window` entries are materialised; window = k + per-column take is
// enough to absorb every possible collision with rows chosen earlier.
std::vector<Index> extreme_window(const Matrix& values, Index col, bool smallest, Index window) {
  const Index n = values.rows();
  window = std::min(window, n);
  std::vector<Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), Index{0});
  const auto cmp = [&](Index a, Index b) {
    const double va = values(a, col);
    const double vb = values(b, col);
    if (va != vb) return smallest ? va < vb : va > vb;
    return a < b;
  };
  std::nth_element(order.begin(), order.begin() + window - 1, order.end(), cmp);
  order.resize(static_cast<std::size_t>(window));
  std::sort(order.begin(), order.end(), cmp);
  return order;
}

}  // namespace

std::vector<Index> iboss_select(const DataMatrix& data, Index k) {
  validate(data);
  const Index n = data.n();
  const Index p = data.p();
  if (k < 1) {
    throw ValidationError("selection requires k >= 1");
  }
  if (k > n) {
    throw ValidationError("k exceeds n (k = " + std::to_string(k) + ", n = " + std::to_string(n) +
                          ")");
  }

  const Index per_extreme = k / (2 * p);  // may be 0 when k < 2p
  // Large enough that a window can absorb every possible collision with rows
  // chosen through other columns and still hold its own quota.
  const Index window = std::min(n, k + std::max<Index>(per_extreme, 1) + 2 * p);
  std::vector<std::vector<Index>> low(static_cast<std::size_t>(p));
  std::vector<std::vector<Index>> high(static_cast<std::size_t>(p));
  for (Index j = 0; j < p; ++j) {
    low[static_cast<std::size_t>(j)] = extreme_window(data.values, j, true, window);
    high[static_cast<std::size_t>(j)] = extreme_window(data.values, j, false, window);
  }

  std::vector<Index> chosen;
  chosen.reserve(static_cast<std::size_t>(k));
  std::vector<char> taken(static_cast<std::size_t>(n), 0);
  std::vector<std::size_t> low_pos(static_cast<std::size_t>(p), 0);
  std::vector<std::size_t> high_pos(static_cast<std::size_t>(p), 0);

  auto take_from = [&](std::vector<Index>& order, std::size_t& pos) {
    while (pos < order.size()) {
      const Index row = order[pos++];
      if (!taken[static_cast<std::size_t>(row)]) {
        taken[static_cast<std::size_t>(row)] = 1;
        chosen.push_back(row);
        return true;
      }
    }
    return false;
  };

  // Main sweep: per_extreme rows from each end of every column.
  for (Index j = 0; j < p && static_cast<Index>(chosen.size()) < k; ++j) {
    const auto ji = static_cast<std::size_t>(j);
    for (Index t = 0; t < per_extreme && static_cast<Index>(chosen.size()) < k; ++t)
      take_from(low[ji], low_pos[ji]);
    for (Index t = 0; t < per_extreme && static_cast<Index>(chosen.size()) < k; ++t)
      take_from(high[ji], high_pos[ji]);
  }
  // Remainder: continue the sweep one extreme at a time, alternating ends.
  Index visit = 0;
  while (static_cast<Index>(chosen.size()) < k) {
    const auto ji = static_cast<std::size_t>(visit % p);
    const bool want_low = visit % 2 == 0;
    bool ok = want_low ? take_from(low[ji], low_pos[ji]) : take_from(high[ji], high_pos[ji]);
    if (!ok) ok = want_low ? take_from(high[ji], high_pos[ji]) : take_from(low[ji], low_pos[ji]);
    if (!ok) {
      // Both windows of this column exhausted (tiny n); take any free row.
      for (Index r = 0; r < n; ++r) {
        if (!taken[static_cast<std::size_t>(r)]) {
          taken[static_cast<std::size_t>(r)] = 1;
          chosen.push_back(r);
          break;
        }
      }
    }
    ++visit;
  }
  return chosen;
}

}  // namespace oss
