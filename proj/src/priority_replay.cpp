#include "cawr/priority_replay.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>
#include <unordered_map>

#include "cawr/errors.hpp"

namespace cawr {

SumTree::SumTree(std::size_t n, double init) : size_(n) {
  if (n == 0) throw ValidationError("sum tree needs at least one element");
  base_ = 1;
  while (base_ < n) base_ <<= 1;
  tree_.assign(2 * base_, 0.0);
  for (std::size_t i = 0; i < n; ++i) tree_[base_ + i] = init;
  for (std::size_t i = base_ - 1; i >= 1; --i) tree_[i] = tree_[2 * i] + tree_[2 * i + 1];
}

double SumTree::get(std::size_t i) const {
  if (i >= size_) throw ValidationError("sum tree index out of range");
  return tree_[base_ + i];
}

void SumTree::set(std::size_t i, double priority) {
  if (i >= size_) throw ValidationError("sum tree index out of range");
  if (!(priority >= 0.0) || !std::isfinite(priority)) {
    throw ValidationError("priority must be finite and nonnegative");
  }
  std::size_t node = base_ + i;
  tree_[node] = priority;
  node >>= 1;
  while (node >= 1) {
    tree_[node] = tree_[2 * node] + tree_[2 * node + 1];
    node >>= 1;
  }
}

std::size_t SumTree::sample(double u01) const {
  double r = u01 * total();
  std::size_t node = 1;
  while (node < base_) {
    const double left = tree_[2 * node];
    if (r < left) {
      node = 2 * node;
    } else {
      r -= left;
      node = 2 * node + 1;
    }
  }
  std::size_t idx = node - base_;
  if (idx >= size_) idx = size_ - 1;  // guards the r == total edge
  return idx;
}

std::string to_string(PriorityKind kind) {
  switch (kind) {
    case PriorityKind::None: return "none";
    case PriorityKind::ExpStandard: return "standard";
    case PriorityKind::ExpNormal: return "normal";
    case PriorityKind::ExpQuantile: return "quantile";
    case PriorityKind::Odpr: return "odpr";
    case PriorityKind::Aw: return "aw";
  }
  return "none";
}

PriorityKind priority_kind_from_string(const std::string& name) {
  if (name == "none") return PriorityKind::None;
  if (name == "standard") return PriorityKind::ExpStandard;
  if (name == "normal") return PriorityKind::ExpNormal;
  if (name == "quantile") return PriorityKind::ExpQuantile;
  if (name == "odpr") return PriorityKind::Odpr;
  if (name == "aw") return PriorityKind::Aw;
  throw ConfigError("unknown priority kind: " + name);
}

AdvantageStats batch_stats(std::span<const double> advantages, double quantile_level) {
  if (advantages.empty()) throw ValidationError("batch_stats: empty advantage batch");
  if (!(quantile_level > 0.0 && quantile_level < 1.0)) {
    throw ConfigError("quantile level must lie in (0, 1)");
  }
  AdvantageStats s;
  s.count = advantages.size();
  double sum = 0.0, min = advantages[0];
  for (double a : advantages) {
    sum += a;
    min = std::min(min, a);
  }
  s.mean = sum / static_cast<double>(s.count);
  s.min = min;
  double ss = 0.0;
  for (double a : advantages) ss += (a - s.mean) * (a - s.mean);
  s.stddev = std::sqrt(ss / static_cast<double>(s.count));

  std::vector<double> sorted(advantages.begin(), advantages.end());
  std::sort(sorted.begin(), sorted.end());
  const double pos = quantile_level * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(pos);
  const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  s.quantile = sorted[lo] * (1.0 - frac) + sorted[hi] * frac;
  return s;
}

namespace {

double clipped_exp(double arg, double p_max) {
  // The result is clipped to p_max anyway, so cap the exponent first.
  return std::exp(std::min(arg, std::log(p_max) + 1.0));
}

}  // namespace

double priority_raw(const PriorityScheme& scheme, double advantage, const AdvantageStats& stats) {
  PriorityKind kind = scheme.kind;
  if (scheme.needs_stddev() && stats.stddev == 0.0) kind = PriorityKind::ExpStandard;
  switch (kind) {
    case PriorityKind::None:
      return 1.0;
    case PriorityKind::ExpStandard:
      return clipped_exp(advantage / scheme.lambda, scheme.p_max);
    case PriorityKind::ExpNormal:
      return clipped_exp((advantage - stats.mean) / (scheme.lambda * stats.stddev), scheme.p_max);
    case PriorityKind::ExpQuantile:
      return clipped_exp((advantage - stats.quantile) / (scheme.lambda * stats.stddev), scheme.p_max);
    case PriorityKind::Odpr:
      return std::max(scheme.odpr_scale * (advantage - stats.min), scheme.priority_floor);
    case PriorityKind::Aw: {
      const double num = clipped_exp(advantage / scheme.lambda, scheme.p_max);
      return stats.aw_normalizer > 0.0 ? num / stats.aw_normalizer : num;
    }
  }
  return 1.0;
}

double priority_value(const PriorityScheme& scheme, double advantage, const AdvantageStats& stats) {
  return std::clamp(priority_raw(scheme, advantage, stats), scheme.priority_floor, scheme.p_max);
}

std::vector<std::size_t> sample_uniform_indices(std::size_t data_size, std::size_t n, Rng& rng) {
  if (data_size == 0) throw ValidationError("cannot sample from an empty buffer");
  std::vector<std::size_t> batch(n);
  for (std::size_t k = 0; k < n; ++k) batch[k] = rng.uniform_index(data_size);
  return batch;
}

ReplayBuffer::ReplayBuffer(std::size_t data_size, PriorityScheme scheme)
    : tree_(data_size, 1.0), scheme_(scheme) {
  if (!(scheme_.lambda > 0.0)) throw ConfigError("priority lambda must be positive");
  if (!(scheme_.priority_floor > 0.0)) throw ConfigError("priority floor must be positive");
  if (!(scheme_.p_max > scheme_.priority_floor)) throw ConfigError("p_max must exceed the floor");
  if (scheme_.kind == PriorityKind::Aw) aw_exp_.assign(data_size, 0.0);
}

std::vector<std::size_t> ReplayBuffer::sample_uniform(std::size_t n, Rng& rng) const {
  return sample_uniform_indices(tree_.size(), n, rng);
}

std::vector<std::size_t> ReplayBuffer::sample_prioritized(std::size_t n, Rng& rng) const {
  std::vector<std::size_t> batch(n);
  for (std::size_t k = 0; k < n; ++k) batch[k] = tree_.sample(rng.uniform());
  return batch;
}

void ReplayBuffer::update_priorities(std::span<const std::size_t> indices,
                                     std::span<const double> advantages) {
  if (indices.empty()) throw ValidationError("update_priorities: empty index batch");
  AdvantageStats stats = batch_stats(advantages, scheme_.quantile_level);
  if (scheme_.stats_ema > 0.0 && has_stats_) {
    const double e = scheme_.stats_ema;
    stats.mean = e * stats_.mean + (1.0 - e) * stats.mean;
    stats.stddev = e * stats_.stddev + (1.0 - e) * stats.stddev;
    stats.quantile = e * stats_.quantile + (1.0 - e) * stats.quantile;
    stats.min = std::min(stats_.min, stats.min);
  }
  update_priorities(indices, advantages, stats);
}

void ReplayBuffer::update_priorities(std::span<const std::size_t> indices,
                                     std::span<const double> advantages, AdvantageStats stats) {
  if (indices.size() != advantages.size()) {
    throw ValidationError("update_priorities: index/advantage size mismatch");
  }
  for (std::size_t i : indices) {
    if (i >= tree_.size()) throw ValidationError("update_priorities: index out of range");
  }
  if (scheme_.needs_stddev() && stats.stddev == 0.0 && !warned_zero_stddev_) {
    std::cerr << "[cawr] advantage spread is zero; priority falls back to the standard "
                 "exponential form\n";
    warned_zero_stddev_ = true;
  }

  // Last submitted advantage wins for duplicate indices.
  std::unordered_map<std::size_t, double> latest;
  latest.reserve(indices.size());
  std::vector<std::size_t> order;
  order.reserve(indices.size());
  for (std::size_t k = 0; k < indices.size(); ++k) {
    if (latest.emplace(indices[k], advantages[k]).second) {
      order.push_back(indices[k]);
    } else {
      latest[indices[k]] = advantages[k];
    }
  }

  if (scheme_.kind == PriorityKind::Aw) {
    for (std::size_t i : order) {
      const double e = clipped_exp(latest[i] / scheme_.lambda, scheme_.p_max);
      aw_sum_ += e - aw_exp_[i];
      aw_exp_[i] = e;
    }
    stats.aw_normalizer = aw_sum_;
  }

  for (std::size_t i : order) {
    tree_.set(i, priority_value(scheme_, latest[i], stats));
  }
  stats_ = stats;
  has_stats_ = true;
}

double ReplayBuffer::priority_entropy() const {
  const double total = tree_.total();
  if (total <= 0.0) return 0.0;
  double h = 0.0;
  for (std::size_t i = 0; i < tree_.size(); ++i) {
    const double p = tree_.get(i) / total;
    if (p > 0.0) h -= p * std::log(p);
  }
  return h;
}

}  // namespace cawr
