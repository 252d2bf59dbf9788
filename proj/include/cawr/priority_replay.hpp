#pragma once

#include <span>
#include <string>
#include <vector>

#include "cawr/rng.hpp"

namespace cawr {

/// Binary indexed tree over per-index priorities for O(log n) proportional
/// sampling. Partial sums are recomputed bottom-up on every write, so they
/// never drift from the leaves.
class SumTree {
 public:
  explicit SumTree(std::size_t n, double init = 1.0);

  std::size_t size() const { return size_; }
  double get(std::size_t i) const;
  void set(std::size_t i, double priority);
  double total() const { return tree_[1]; }

  /// Index with P(i) = p_i / total for u drawn uniformly in [0, 1).
  std::size_t sample(double u01) const;

 private:
  std::size_t size_;
  std::size_t base_;  // leaf offset, power of two
  std::vector<double> tree_;
};

enum class PriorityKind { None, ExpStandard, ExpNormal, ExpQuantile, Odpr, Aw };

std::string to_string(PriorityKind kind);
PriorityKind priority_kind_from_string(const std::string& name);

/// Advantage-to-priority map h with its parameters. All emitted priorities
/// are clipped to [floor, p_max]; h is nonnegative and nondecreasing in the
/// advantage for every kind.
struct PriorityScheme {
  PriorityKind kind = PriorityKind::None;
  double lambda = 1.0 / 3.0;
  double quantile_level = 0.5;  // ExpQuantile
  double odpr_scale = 1.0;
  double priority_floor = 1e-6;
  double p_max = 1e4;
  double stats_ema = 0.0;  // 0 = batch-local stats; > 0 blends with history

  bool needs_stddev() const {
    return kind == PriorityKind::ExpNormal || kind == PriorityKind::ExpQuantile;
  }
};

/// Statistics over the most recent advantage evaluations.
struct AdvantageStats {
  double mean = 0.0;
  double stddev = 0.0;
  double quantile = 0.0;
  double min = 0.0;
  std::size_t count = 0;
  double aw_normalizer = 0.0;  // running sum of exp(A / lambda) over written entries
};

AdvantageStats batch_stats(std::span<const double> advantages, double quantile_level);

/// h(A) before the [floor, p_max] clip. Kinds that need a spread fall back
/// to ExpStandard when stddev == 0.
double priority_raw(const PriorityScheme& scheme, double advantage, const AdvantageStats& stats);
/// Clipped priority actually written to the buffer.
double priority_value(const PriorityScheme& scheme, double advantage, const AdvantageStats& stats);

/// Uniform index draws; shared with the buffer so the two sampling streams
/// consume randomness identically.
std::vector<std::size_t> sample_uniform_indices(std::size_t data_size, std::size_t n, Rng& rng);

/// Priorities over a dataset plus the dual-batch sampling surface. Single
/// writer; sampling from a frozen buffer is safe concurrently. Priorities
/// start at 1 and are overwritten (never multiplied) by update_priorities.
class ReplayBuffer {
 public:
  ReplayBuffer(std::size_t data_size, PriorityScheme scheme);

  std::size_t size() const { return tree_.size(); }
  const PriorityScheme& scheme() const { return scheme_; }
  double priority(std::size_t i) const { return tree_.get(i); }
  const AdvantageStats& stats() const { return stats_; }

  /// I.i.d. uniform indices; ignores priorities entirely.
  std::vector<std::size_t> sample_uniform(std::size_t n, Rng& rng) const;

  /// Proportional-to-priority indices, with replacement. With all priorities
  /// equal (including the all-floor case) this degenerates to uniform.
  std::vector<std::size_t> sample_prioritized(std::size_t n, Rng& rng) const;

  /// Overwrites priorities at the given indices from h(advantage) and
  /// refreshes the stats from this batch. Duplicate indices collapse to
  /// their last submitted advantage. Applying the same call twice is a
  /// fixed point.
  void update_priorities(std::span<const std::size_t> indices, std::span<const double> advantages);
  /// Same, but with stats the caller already computed for this batch.
  void update_priorities(std::span<const std::size_t> indices, std::span<const double> advantages,
                         AdvantageStats stats);

  /// Entropy of the normalized priority distribution (diagnostic).
  double priority_entropy() const;

 private:
  SumTree tree_;
  PriorityScheme scheme_;
  AdvantageStats stats_;
  bool has_stats_ = false;
  bool warned_zero_stddev_ = false;
  // Advantage-weighted softmax bookkeeping: last written exp(A / lambda).
  std::vector<double> aw_exp_;
  double aw_sum_ = 0.0;
};

}  // namespace cawr
