#pragma once

#include <cstdint>
#include <vector>

#include "oss/discrepancy.hpp"
#include "oss/types.hpp"

namespace oss {

enum class Elimination { Scheduled, None };

/// Knobs for the sequential subsample selection.
///
/// Tie-breaking is fixed, not configurable: whenever two candidates compare
/// equal (initial norm argmax, election argmin, elimination cut) the one with
/// the larger squared norm wins, then the smaller original row index. This
/// makes every run fully deterministic.
struct OssConfig {
  Index k = 0;
  int exponent = 2;                       // pairwise penalty exponent, 2 or 4
  Elimination elimination = Elimination::Scheduled;
  int batches = 1;                        // g; > 1 partitions rows into g pools
  std::uint64_t seed = 0;                 // used only for the batch partition
  int threads = 0;                        // batch-level parallelism; 0 = hardware
  bool trace = false;                     // record per-step elected losses
};

/// Mutable selection state over a scaled matrix (not owned).
struct CandidatePool {
  const Matrix* data = nullptr;       // scaled rows, referenced for the pool's lifetime
  std::vector<Index> active;          // candidate row indices (unordered)
  std::vector<double> loss_acc;       // accumulated loss, aligned with `active`
  Vector sq_norms;                    // |x_i|^2 for every row of *data
  std::vector<Index> selected;        // chosen rows, in selection order
  double last_elected_loss = 0.0;     // accumulated loss of the latest election

  explicit CandidatePool(const Matrix& scaled);
  /// Pool restricted to a subset of rows (batched selection); `norms` must be
  /// the full-length squared-norm vector of `scaled`.
  CandidatePool(const Matrix& scaled, std::vector<Index> rows, const Vector& norms);
};

/// Selection output. `indices` are original row numbers in selection order.
struct SubsampleResult {
  std::vector<Index> indices;
  double discrepancy = 0.0;             // total discrepancy of the selected set
  std::vector<double> per_step_losses;  // optional trace (empty unless requested)
  std::vector<Index> batch_sizes;       // per-batch selection counts, {k} when g == 1
  std::uint64_t candidate_visits = 0;   // loss updates performed (cost counter)
};

/// Step 1: move the largest-norm row from active to selected and zero the
/// loss accumulator. Call exactly once per pool.
Index select_initial(CandidatePool& pool);

/// One election: add pair_loss(x, row(last)) to every active row's
/// accumulator, then move the row with the smallest accumulated loss to
/// selected. Returns the elected row.
Index election_step(CandidatePool& pool, Index last, const OssConfig& cfg);

/// Candidate budget after the i-th selection (i >= 2): floor(n / i) when
/// n >= k^2, else floor(n / i^(r-1)) with r = log n / log k, clamped below by
/// k - i so enough candidates always remain.
std::int64_t elimination_budget(std::int64_t n, std::int64_t k, std::int64_t i);

/// Keeps the `budget` active rows with the smallest accumulated loss
/// (ties: larger norm, then smaller index). No-op when the pool is already
/// within budget.
void eliminate(CandidatePool& pool, std::int64_t budget);

/// Sequential election/elimination selection of cfg.k rows from a matrix
/// scaled to [-1, 1]^p. Deterministic; rejects unscaled input (any entry
/// beyond 1 + 1e-9 in magnitude).
SubsampleResult oss_select(const Matrix& scaled, const OssConfig& cfg);

/// Partitions the rows into cfg.batches disjoint pools (seeded shuffle, then
/// contiguous blocks), selects k/g rows from each (the first k mod g pools
/// take one extra), and concatenates in pool order. Pools may run on separate
/// threads; the result is independent of scheduling.
SubsampleResult oss_select_batched(const Matrix& scaled, const OssConfig& cfg);

}  // namespace oss
