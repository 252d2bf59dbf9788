#include "cawr/tabular_mdp.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>

#include "cawr/errors.hpp"

namespace cawr {

void validate_policy(const DiscretePolicy& policy, std::size_t n_actions, double tol) {
  for (std::size_t s = 0; s < policy.size(); ++s) {
    if (policy[s].size() != n_actions) {
      throw ValidationError("policy row " + std::to_string(s) + " has wrong action count");
    }
    double sum = 0.0;
    for (double p : policy[s]) {
      if (p < 0.0 || !std::isfinite(p)) {
        throw ValidationError("policy row " + std::to_string(s) + " has an invalid probability");
      }
      sum += p;
    }
    if (std::abs(sum - 1.0) > tol) {
      throw ValidationError("policy row " + std::to_string(s) + " sums to " + std::to_string(sum));
    }
  }
}

TabularMDP::TabularMDP(std::size_t n_states, std::size_t n_actions, std::vector<double> kernel,
                       std::vector<double> rewards, double gamma,
                       std::vector<double> initial_dist, std::vector<std::uint8_t> terminal_states)
    : n_states_(n_states),
      n_actions_(n_actions),
      kernel_(std::move(kernel)),
      rewards_(std::move(rewards)),
      gamma_(gamma),
      initial_dist_(std::move(initial_dist)),
      terminal_(std::move(terminal_states)) {
  if (n_states_ == 0 || n_actions_ == 0) throw ValidationError("MDP needs at least one state and action");
  if (kernel_.size() != n_states_ * n_actions_ * n_states_) throw ValidationError("kernel size mismatch");
  if (rewards_.size() != n_states_ * n_actions_) throw ValidationError("reward table size mismatch");
  if (!(gamma_ >= 0.0 && gamma_ <= 1.0)) throw ValidationError("gamma must lie in [0, 1]");
  if (initial_dist_.size() != n_states_) throw ValidationError("initial distribution size mismatch");
  if (!terminal_.empty() && terminal_.size() != n_states_) {
    throw ValidationError("terminal flag vector size mismatch");
  }

  for (std::size_t s = 0; s < n_states_; ++s) {
    for (std::size_t a = 0; a < n_actions_; ++a) {
      double row = 0.0;
      for (std::size_t s2 = 0; s2 < n_states_; ++s2) {
        const double pr = p(s, a, s2);
        if (pr < 0.0 || !std::isfinite(pr)) throw ValidationError("kernel has an invalid probability");
        row += pr;
      }
      if (std::abs(row - 1.0) > 1e-9) {
        throw ValidationError("kernel row (s=" + std::to_string(s) + ", a=" + std::to_string(a) +
                              ") sums to " + std::to_string(row));
      }
      if (!std::isfinite(r(s, a))) throw ValidationError("non-finite reward entry");
    }
  }
  double d0 = 0.0;
  for (double pr : initial_dist_) {
    if (pr < 0.0) throw ValidationError("initial distribution has a negative entry");
    d0 += pr;
  }
  if (std::abs(d0 - 1.0) > 1e-9) throw ValidationError("initial distribution does not sum to 1");

  for (std::size_t s = 0; s < n_states_; ++s) {
    if (!is_terminal(s)) continue;
    for (std::size_t a = 0; a < n_actions_; ++a) {
      if (std::abs(p(s, a, s) - 1.0) > 1e-12 || std::abs(r(s, a)) > 1e-12) {
        throw ValidationError("terminal state " + std::to_string(s) +
                              " must self-loop with zero reward");
      }
    }
  }
  reward_bound_ = *std::max_element(rewards_.begin(), rewards_.end());
}

QV exact_q_v(const TabularMDP& mdp, const DiscretePolicy& policy) {
  const std::size_t n = mdp.n_states();
  const std::size_t na = mdp.n_actions();
  if (policy.size() != n) throw ValidationError("policy has wrong number of states");
  validate_policy(policy, na);

  // Solve (I - gamma * P_pi) V = r_pi over non-terminal states; terminal
  // states are pinned to V = 0, which also keeps gamma = 1 solvable.
  std::vector<std::size_t> live;
  live.reserve(n);
  std::vector<int> pos(n, -1);
  for (std::size_t s = 0; s < n; ++s) {
    if (!mdp.is_terminal(s)) {
      pos[s] = static_cast<int>(live.size());
      live.push_back(s);
    }
  }

  QV out;
  out.v.assign(n, 0.0);
  out.q.assign(n * na, 0.0);

  const std::size_t m = live.size();
  if (m > 0) {
    Eigen::MatrixXd lhs = Eigen::MatrixXd::Identity(m, m);
    Eigen::VectorXd rhs(m);
    for (std::size_t i = 0; i < m; ++i) {
      const std::size_t s = live[i];
      double reward = 0.0;
      for (std::size_t a = 0; a < na; ++a) {
        const double pa = policy[s][a];
        if (pa == 0.0) continue;
        reward += pa * mdp.r(s, a);
        for (std::size_t j = 0; j < m; ++j) {
          const std::size_t s2 = live[j];
          lhs(i, j) -= mdp.gamma() * pa * mdp.p(s, a, s2);
        }
      }
      rhs(i) = reward;
    }
    const Eigen::VectorXd v = lhs.partialPivLu().solve(rhs);
    for (std::size_t i = 0; i < m; ++i) out.v[live[i]] = v(i);
  }

  for (std::size_t s = 0; s < n; ++s) {
    for (std::size_t a = 0; a < na; ++a) {
      double next = 0.0;
      for (std::size_t s2 = 0; s2 < n; ++s2) next += mdp.p(s, a, s2) * out.v[s2];
      out.q[s * na + a] = mdp.r(s, a) + mdp.gamma() * next;
    }
  }

  double residual = 0.0;
  for (std::size_t s = 0; s < n; ++s) {
    if (mdp.is_terminal(s)) continue;
    double v_from_q = 0.0;
    for (std::size_t a = 0; a < na; ++a) v_from_q += policy[s][a] * out.q[s * na + a];
    residual = std::max(residual, std::abs(v_from_q - out.v[s]));
  }
  out.bellman_residual = residual;
  if (residual > 1e-10) {
    throw ValidationError("policy evaluation residual " + std::to_string(residual) +
                          " exceeds 1e-10 (near-singular system?)");
  }
  return out;
}

OptimalSolution solve_optimal(const TabularMDP& mdp, double tol, std::size_t max_iters) {
  const std::size_t n = mdp.n_states();
  const std::size_t na = mdp.n_actions();
  OptimalSolution out;
  out.v.assign(n, 0.0);
  out.q.assign(n * na, 0.0);

  for (std::size_t iter = 0; iter < max_iters; ++iter) {
    double delta = 0.0;
    for (std::size_t s = 0; s < n; ++s) {
      if (mdp.is_terminal(s)) continue;
      double best = -std::numeric_limits<double>::infinity();
      for (std::size_t a = 0; a < na; ++a) {
        double next = 0.0;
        for (std::size_t s2 = 0; s2 < n; ++s2) next += mdp.p(s, a, s2) * out.v[s2];
        const double q = mdp.r(s, a) + mdp.gamma() * next;
        out.q[s * na + a] = q;
        best = std::max(best, q);
      }
      delta = std::max(delta, std::abs(best - out.v[s]));
      out.v[s] = best;
    }
    if (delta < tol) break;
  }
  // One more sweep so Q is consistent with the final V.
  for (std::size_t s = 0; s < n; ++s) {
    for (std::size_t a = 0; a < na; ++a) {
      double next = 0.0;
      for (std::size_t s2 = 0; s2 < n; ++s2) next += mdp.p(s, a, s2) * out.v[s2];
      out.q[s * na + a] = mdp.is_terminal(s) ? 0.0 : mdp.r(s, a) + mdp.gamma() * next;
    }
  }

  out.greedy.assign(n, std::vector<double>(na, 0.0));
  for (std::size_t s = 0; s < n; ++s) {
    std::size_t best = 0;
    for (std::size_t a = 1; a < na; ++a) {
      if (out.q[s * na + a] > out.q[s * na + best]) best = a;
    }
    out.greedy[s][best] = 1.0;
  }
  return out;
}

double policy_return(const TabularMDP& mdp, const DiscretePolicy& policy) {
  const QV qv = exact_q_v(mdp, policy);
  double j = 0.0;
  for (std::size_t s = 0; s < mdp.n_states(); ++s) j += mdp.initial_dist()[s] * qv.v[s];
  return j;
}

UniformBinner UniformBinner::identity(std::size_t n_values) {
  UniformBinner b;
  b.lo = {0.0};
  b.hi = {static_cast<double>(n_values > 1 ? n_values - 1 : 1)};
  b.bins = {n_values};
  return b;
}

std::size_t UniformBinner::n_cells() const {
  std::size_t n = 1;
  for (std::size_t b : bins) n *= b;
  return n;
}

std::size_t UniformBinner::cell(const std::vector<double>& x) const {
  if (x.size() != bins.size()) throw ValidationError("binner dimension mismatch");
  std::size_t flat = 0;
  for (std::size_t d = 0; d < bins.size(); ++d) {
    const double span = hi[d] - lo[d];
    double t = span > 0.0 ? (x[d] - lo[d]) / span : 0.0;
    t = std::clamp(t, 0.0, 1.0);
    auto b = static_cast<std::size_t>(t * static_cast<double>(bins[d]));
    if (b >= bins[d]) b = bins[d] - 1;
    flat = flat * bins[d] + b;
  }
  return flat;
}

EmpiricalMdp empirical_mdp(const Dataset& dataset, const UniformBinner& state_binner,
                           const UniformBinner& action_binner, double gamma) {
  const std::size_t n = state_binner.n_cells();
  const std::size_t na = action_binner.n_cells();

  std::vector<std::size_t> counts(n * na, 0);
  std::vector<double> next_counts(n * na * n, 0.0);
  std::vector<double> reward_sum(n * na, 0.0);
  std::vector<double> d0(n, 0.0);
  std::size_t n_starts = 0;

  bool episode_start = true;
  for (const Transition& t : dataset) {
    const std::size_t s = state_binner.cell(t.state);
    const std::size_t a = action_binner.cell(t.action);
    const std::size_t s2 = state_binner.cell(t.next_state);
    counts[s * na + a] += 1;
    next_counts[(s * na + a) * n + s2] += 1.0;
    reward_sum[s * na + a] += t.reward;
    if (episode_start) {
      d0[s] += 1.0;
      ++n_starts;
    }
    episode_start = t.terminal;
  }
  if (n_starts == 0) {
    d0[state_binner.cell(dataset[0].state)] = 1.0;
    n_starts = 1;
  }
  for (double& p : d0) p /= static_cast<double>(n_starts);

  std::vector<double> kernel(n * na * n, 0.0);
  std::vector<double> rewards(n * na, 0.0);
  std::vector<std::uint8_t> observed(n * na, 0);
  for (std::size_t sa = 0; sa < n * na; ++sa) {
    if (counts[sa] > 0) {
      observed[sa] = 1;
      for (std::size_t s2 = 0; s2 < n; ++s2) {
        kernel[sa * n + s2] = next_counts[sa * n + s2] / static_cast<double>(counts[sa]);
      }
      rewards[sa] = reward_sum[sa] / static_cast<double>(counts[sa]);
    } else {
      kernel[sa * n + sa / na] = 1.0;  // absent: placeholder self-loop, zero reward
    }
  }

  DiscretePolicy behavior(n, std::vector<double>(na, 1.0 / static_cast<double>(na)));
  std::vector<std::uint8_t> state_observed(n, 0);
  for (std::size_t s = 0; s < n; ++s) {
    std::size_t total = 0;
    for (std::size_t a = 0; a < na; ++a) total += counts[s * na + a];
    if (total == 0) continue;
    state_observed[s] = 1;
    for (std::size_t a = 0; a < na; ++a) {
      behavior[s][a] = static_cast<double>(counts[s * na + a]) / static_cast<double>(total);
    }
  }

  TabularMDP mdp(n, na, std::move(kernel), std::move(rewards), gamma, std::move(d0));
  return EmpiricalMdp{std::move(mdp), std::move(observed), std::move(counts),
                      std::move(state_observed), std::move(behavior)};
}

}  // namespace cawr
