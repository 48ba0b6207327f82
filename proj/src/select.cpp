#include "oss/select.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "oss/parallel.hpp"
#include "oss/rng.hpp"

namespace oss {

namespace {

void validate_config(const OssConfig& cfg, Index n) {
  if (cfg.k < 1) {
    throw ValidationError("subsample size k must be at least 1");
  }
  if (cfg.k > n) {
    throw ValidationError("k exceeds n (k = " + std::to_string(cfg.k) + ", n = " +
                          std::to_string(n) + ")");
  }
  if (cfg.exponent != 2 && cfg.exponent != 4) {
    throw ValidationError("exponent must be 2 or 4, got " + std::to_string(cfg.exponent));
  }
  if (cfg.batches < 1) {
    throw ValidationError("batch count must be at least 1");
  }
}

void check_scaled(const Matrix& scaled) {
  constexpr double kBound = 1.0 + 1e-9;
  for (Index i = 0; i < scaled.rows(); ++i) {
    for (Index j = 0; j < scaled.cols(); ++j) {
      const double v = scaled(i, j);
      if (!(std::abs(v) <= kBound)) {  // also catches NaN
        throw ValidationError("input is not scaled to [-1, 1]: entry (" + std::to_string(i) +
                              ", " + std::to_string(j) + ") = " + std::to_string(v));
      }
    }
  }
}

// Fixed tie-break: smaller loss wins, then larger squared norm, then smaller
// original row index.
bool better_candidate(double loss_a, double norm_a, Index idx_a, double loss_b, double norm_b,
                      Index idx_b) {
  if (loss_a != loss_b) return loss_a < loss_b;
  if (norm_a != norm_b) return norm_a > norm_b;
  return idx_a < idx_b;
}

// Election and scheduled elimination until `k` rows are selected; budget uses
// the pool's own initial candidate count as n.
void run_selection(CandidatePool& pool, Index k, const OssConfig& cfg, SubsampleResult& out) {
  const std::int64_t n = static_cast<std::int64_t>(pool.active.size());
  select_initial(pool);
  if (cfg.trace) out.per_step_losses.push_back(0.0);
  for (Index i = 2; i <= k; ++i) {
    out.candidate_visits += pool.active.size();
    election_step(pool, pool.selected.back(), cfg);
    if (cfg.trace) out.per_step_losses.push_back(pool.last_elected_loss);
    if (i < k && cfg.elimination == Elimination::Scheduled) {
      eliminate(pool, elimination_budget(n, k, i));
    }
  }
}

// Discrepancy of the selected set, evaluated over index-sorted rows so the
// value depends only on the set, not on the selection order.
double selected_set_discrepancy(const Matrix& scaled, const std::vector<Index>& indices,
                                int exponent) {
  if (indices.size() < 2) return 0.0;
  std::vector<Index> sorted = indices;
  std::sort(sorted.begin(), sorted.end());
  return total_discrepancy(gather_rows(scaled, sorted), DiscrepancyConfig{exponent});
}

}  // namespace

CandidatePool::CandidatePool(const Matrix& scaled) : data(&scaled) {
  active.resize(static_cast<std::size_t>(scaled.rows()));
  std::iota(active.begin(), active.end(), Index{0});
  loss_acc.assign(active.size(), 0.0);
  sq_norms = scaled.rowwise().squaredNorm();
}

CandidatePool::CandidatePool(const Matrix& scaled, std::vector<Index> rows, const Vector& norms)
    : data(&scaled), active(std::move(rows)), sq_norms(norms) {
  loss_acc.assign(active.size(), 0.0);
}

Index select_initial(CandidatePool& pool) {
  if (pool.active.empty()) {
    throw ValidationError("candidate pool is empty");
  }
  if (!pool.selected.empty()) {
    throw ValidationError("initial selection was already made");
  }
  std::size_t best = 0;
  for (std::size_t pos = 1; pos < pool.active.size(); ++pos) {
    const Index cand = pool.active[pos];
    const Index incumbent = pool.active[best];
    if (pool.sq_norms[cand] > pool.sq_norms[incumbent] ||
        (pool.sq_norms[cand] == pool.sq_norms[incumbent] && cand < incumbent)) {
      best = pos;
    }
  }
  const Index chosen = pool.active[best];
  pool.active[best] = pool.active.back();
  pool.active.pop_back();
  pool.loss_acc.assign(pool.active.size(), 0.0);
  pool.selected.push_back(chosen);
  return chosen;
}

Index election_step(CandidatePool& pool, Index last, const OssConfig& cfg) {
  if (pool.active.empty()) {
    throw ValidationError("candidate pool exhausted before k rows were selected");
  }
  const Matrix& x = *pool.data;
  const Index p = x.cols();
  const double pd = static_cast<double>(p);
  const double* last_row = x.row(last).data();
  const double last_norm = pool.sq_norms[last];
  const bool quartic = cfg.exponent == 4;

  std::size_t best = 0;
  for (std::size_t pos = 0; pos < pool.active.size(); ++pos) {
    const Index row = pool.active[pos];
    const double* cand_row = x.row(row).data();
    int agree = 0;
    for (Index l = 0; l < p; ++l) agree += cand_row[l] * last_row[l] > 0.0;
    // Same grouping as pair_loss, so accumulated losses match it bitwise.
    const double base =
        pd - 0.5 * (pool.sq_norms[row] + last_norm) + static_cast<double>(agree);
    const double sq = base * base;
    pool.loss_acc[pos] += quartic ? sq * sq : sq;
    if (pos > 0 && better_candidate(pool.loss_acc[pos], pool.sq_norms[row], row,
                                    pool.loss_acc[best], pool.sq_norms[pool.active[best]],
                                    pool.active[best])) {
      best = pos;
    }
  }
  const Index chosen = pool.active[best];
  pool.last_elected_loss = pool.loss_acc[best];
  pool.active[best] = pool.active.back();
  pool.loss_acc[best] = pool.loss_acc.back();
  pool.active.pop_back();
  pool.loss_acc.pop_back();
  pool.selected.push_back(chosen);
  return chosen;
}

std::int64_t elimination_budget(std::int64_t n, std::int64_t k, std::int64_t i) {
  double value;
  if (n >= k * k) {
    value = static_cast<double>(n) / static_cast<double>(i);
  } else {
    const double r = std::log(static_cast<double>(n)) / std::log(static_cast<double>(k));
    value = static_cast<double>(n) / std::pow(static_cast<double>(i), r - 1.0);
  }
  // Nudge before flooring: the schedule often lands on exact integers that
  // the pow/log round-off leaves a few ulps short.
  const auto floored = static_cast<std::int64_t>(std::floor(value * (1.0 + 4e-15) + 1e-9));
  return std::max(floored, k - i);
}

void eliminate(CandidatePool& pool, std::int64_t budget) {
  if (budget < 1) {
    throw ValidationError("elimination budget must be at least 1");
  }
  const std::int64_t size = static_cast<std::int64_t>(pool.active.size());
  if (size <= budget) return;

  std::vector<std::size_t> order(pool.active.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::nth_element(order.begin(), order.begin() + budget, order.end(),
                   [&](std::size_t a, std::size_t b) {
                     return better_candidate(pool.loss_acc[a], pool.sq_norms[pool.active[a]],
                                             pool.active[a], pool.loss_acc[b],
                                             pool.sq_norms[pool.active[b]], pool.active[b]);
                   });
  std::vector<Index> kept_active(static_cast<std::size_t>(budget));
  std::vector<double> kept_loss(static_cast<std::size_t>(budget));
  for (std::int64_t i = 0; i < budget; ++i) {
    kept_active[static_cast<std::size_t>(i)] = pool.active[order[static_cast<std::size_t>(i)]];
    kept_loss[static_cast<std::size_t>(i)] = pool.loss_acc[order[static_cast<std::size_t>(i)]];
  }
  pool.active = std::move(kept_active);
  pool.loss_acc = std::move(kept_loss);
}

SubsampleResult oss_select(const Matrix& scaled, const OssConfig& cfg) {
  validate_config(cfg, scaled.rows());
  check_scaled(scaled);
  CandidatePool pool(scaled);
  SubsampleResult result;
  run_selection(pool, cfg.k, cfg, result);
  result.indices = pool.selected;
  result.batch_sizes = {cfg.k};
  result.discrepancy = selected_set_discrepancy(scaled, result.indices, cfg.exponent);
  return result;
}

SubsampleResult oss_select_batched(const Matrix& scaled, const OssConfig& cfg) {
  validate_config(cfg, scaled.rows());
  if (cfg.batches > cfg.k) {
    throw ValidationError("g exceeds k (g = " + std::to_string(cfg.batches) + ", k = " +
                          std::to_string(cfg.k) + ")");
  }
  if (cfg.batches == 1) return oss_select(scaled, cfg);
  check_scaled(scaled);

  const Index n = scaled.rows();
  const Index g = cfg.batches;
  std::vector<Index> perm(static_cast<std::size_t>(n));
  std::iota(perm.begin(), perm.end(), Index{0});
  Rng shuffle_rng(derive_stream(cfg.seed, stream::kBatchShuffle));
  shuffle_rng.shuffle(perm);

  const Vector norms = scaled.rowwise().squaredNorm();
  std::vector<SubsampleResult> parts(static_cast<std::size_t>(g));
  std::vector<std::vector<Index>> batch_rows(static_cast<std::size_t>(g));
  std::vector<Index> batch_k(static_cast<std::size_t>(g));
  std::size_t offset = 0;
  for (Index b = 0; b < g; ++b) {
    const Index rows_here = n / g + (b < n % g ? 1 : 0);
    batch_rows[static_cast<std::size_t>(b)].assign(perm.begin() + offset,
                                                   perm.begin() + offset + rows_here);
    batch_k[static_cast<std::size_t>(b)] = cfg.k / g + (b < cfg.k % g ? 1 : 0);
    offset += static_cast<std::size_t>(rows_here);
  }

  run_tasks(static_cast<int>(g), cfg.threads, [&](int b) {
    const auto bi = static_cast<std::size_t>(b);
    CandidatePool pool(scaled, batch_rows[bi], norms);
    run_selection(pool, batch_k[bi], cfg, parts[bi]);
    parts[bi].indices = pool.selected;
  });

  SubsampleResult result;
  for (Index b = 0; b < g; ++b) {
    const auto& part = parts[static_cast<std::size_t>(b)];
    result.indices.insert(result.indices.end(), part.indices.begin(), part.indices.end());
    result.per_step_losses.insert(result.per_step_losses.end(), part.per_step_losses.begin(),
                                  part.per_step_losses.end());
    result.batch_sizes.push_back(batch_k[static_cast<std::size_t>(b)]);
    result.candidate_visits += part.candidate_visits;
  }
  result.discrepancy = selected_set_discrepancy(scaled, result.indices, cfg.exponent);
  return result;
}

}  // namespace oss
