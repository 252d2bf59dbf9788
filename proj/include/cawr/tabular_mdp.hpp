#pragma once

#include <cstdint>
#include <vector>

#include "cawr/dataset.hpp"

namespace cawr {

/// Per-state action distribution table, rows indexed by state.
using DiscretePolicy = std::vector<std::vector<double>>;

/// Throws ValidationError unless every row is a distribution over n_actions
/// (entries >= 0, sum within tol of 1).
void validate_policy(const DiscretePolicy& policy, std::size_t n_actions, double tol = 1e-9);

/// Finite MDP (S, A, p, r, gamma, d0) with optional absorbing terminal
/// states. Terminal states must self-loop with zero reward; exact solvers pin
/// their value to zero, matching the episodic bootstrap convention V(s')=0.
/// Immutable after construction and safe to share across readers.
class TabularMDP {
 public:
  TabularMDP(std::size_t n_states, std::size_t n_actions,
             std::vector<double> kernel,   // p(s'|s,a), layout [s][a][s']
             std::vector<double> rewards,  // r(s,a), layout [s][a]
             double gamma, std::vector<double> initial_dist,
             std::vector<std::uint8_t> terminal_states = {});

  std::size_t n_states() const { return n_states_; }
  std::size_t n_actions() const { return n_actions_; }
  double gamma() const { return gamma_; }
  double p(std::size_t s, std::size_t a, std::size_t s2) const {
    return kernel_[(s * n_actions_ + a) * n_states_ + s2];
  }
  double r(std::size_t s, std::size_t a) const { return rewards_[s * n_actions_ + a]; }
  const std::vector<double>& initial_dist() const { return initial_dist_; }
  bool is_terminal(std::size_t s) const { return !terminal_.empty() && terminal_[s] != 0; }
  double reward_bound() const { return reward_bound_; }

 private:
  std::size_t n_states_, n_actions_;
  std::vector<double> kernel_;
  std::vector<double> rewards_;
  double gamma_;
  std::vector<double> initial_dist_;
  std::vector<std::uint8_t> terminal_;
  double reward_bound_;
};

/// Result of exact policy evaluation. q is laid out [s][a].
struct QV {
  std::vector<double> q;
  std::vector<double> v;
  double bellman_residual = 0.0;

  double advantage(const TabularMDP& mdp, std::size_t s, std::size_t a) const {
    return q[s * mdp.n_actions() + a] - v[s];
  }
};

/// Exact Q/V of a policy via a direct linear solve of the Bellman system.
/// Postcondition: Bellman residual <= 1e-10 (throws otherwise).
QV exact_q_v(const TabularMDP& mdp, const DiscretePolicy& policy);

/// Optimal values and a greedy policy via value iteration to a fixed point.
struct OptimalSolution {
  std::vector<double> v;
  std::vector<double> q;  // [s][a]
  DiscretePolicy greedy;  // deterministic rows
};
OptimalSolution solve_optimal(const TabularMDP& mdp, double tol = 1e-12,
                              std::size_t max_iters = 1000000);

/// Expected discounted return of a policy from the initial distribution.
double policy_return(const TabularMDP& mdp, const DiscretePolicy& policy);

/// Uniform per-dimension binning used to discretize continuous observations.
struct UniformBinner {
  std::vector<double> lo, hi;
  std::vector<std::size_t> bins;

  static UniformBinner identity(std::size_t n_values);  // indices 0..n-1 map to themselves

  std::size_t n_cells() const;
  std::size_t cell(const std::vector<double>& x) const;
};

/// Maximum-likelihood tabular model of a dataset. Unobserved (s,a) pairs are
/// flagged absent (kernel row filled with a self-loop, zero reward) rather
/// than zero-filled. behavior holds the empirical action frequencies; rows of
/// states never visited are uniform placeholders with state_observed = 0.
struct EmpiricalMdp {
  TabularMDP mdp;
  std::vector<std::uint8_t> observed;       // [s][a]
  std::vector<std::size_t> visit_counts;    // [s][a]
  std::vector<std::uint8_t> state_observed; // [s]
  DiscretePolicy behavior;

  bool is_observed(std::size_t s, std::size_t a) const {
    return observed[s * mdp.n_actions() + a] != 0;
  }
};

EmpiricalMdp empirical_mdp(const Dataset& dataset, const UniformBinner& state_binner,
                           const UniformBinner& action_binner, double gamma);

}  // namespace cawr
