#pragma once

#include <memory>
#include <variant>

#include "cawr/dataset.hpp"
#include "cawr/rng.hpp"
#include "cawr/tabular_mdp.hpp"

namespace cawr {

/// Action distributions for stateless continuous tasks.
struct PointAction {
  std::vector<double> action;
};
struct GaussianAction {
  std::vector<double> mean;
  double stddev = 0.1;
};
using ActionDist = std::variant<PointAction, GaussianAction>;

std::vector<double> sample_action(const ActionDist& dist, Rng& rng);
double action_mean_1d(const ActionDist& dist);

/// Behavior mixture pi_beta = (1 - epsilon) * good + epsilon * poor. The
/// component is redrawn independently at every step, so the per-state action
/// distribution is exactly the mixture.
template <class PolicyT>
struct MixtureBehavior {
  PolicyT good;
  PolicyT poor;
  double epsilon = 0.0;
};
using DiscreteMixture = MixtureBehavior<DiscretePolicy>;
using ContinuousMixture = MixtureBehavior<ActionDist>;

/// Stateless 1-D task with reward -(a - target)^2 and one-step episodes.
struct BanditTask {
  double target = 1.0;
};

/// Deterministic shortest-path grid. Actions: 0 = left, 1 = up, 2 = down,
/// 3 = right; moving off the grid stays in place. The goal cell (bottom
/// right) is absorbing with zero reward; entering it pays goal_reward.
struct GridworldSpec {
  std::size_t width = 5;
  std::size_t height = 5;
  double step_reward = -1.0;
  double goal_reward = 10.0;
  double gamma = 0.99;
};
TabularMDP make_gridworld(const GridworldSpec& spec);

/// Roll out a mixture behavior on a tabular MDP. Episodes start from the
/// initial distribution and end on terminal states or at the horizon.
/// Identical arguments (including seed) produce a byte-identical dataset.
Dataset generate_dataset(const TabularMDP& mdp, const DiscreteMixture& behavior,
                         std::size_t n_episodes, std::size_t horizon, std::uint64_t seed);

/// One-step bandit episodes from a continuous mixture.
Dataset generate_dataset(const BanditTask& task, const ContinuousMixture& behavior,
                         std::size_t n_episodes, std::uint64_t seed);

/// Finite-horizon episodic environment used for policy evaluation. Actions
/// arrive in dataset format (already decoded from the policy output).
class Env {
 public:
  virtual ~Env() = default;

  struct Step {
    std::vector<double> state;
    double reward = 0.0;
    bool done = false;
  };

  virtual std::vector<double> reset(Rng& rng) = 0;
  virtual Step step(const std::vector<double>& action, Rng& rng) = 0;
  virtual std::size_t horizon() const = 0;
};

class BanditEnv : public Env {
 public:
  explicit BanditEnv(BanditTask task) : task_(task) {}
  std::vector<double> reset(Rng&) override { return {0.0}; }
  Step step(const std::vector<double>& action, Rng&) override;
  std::size_t horizon() const override { return 1; }

 private:
  BanditTask task_;
};

class TabularEnv : public Env {
 public:
  TabularEnv(const TabularMDP& mdp, std::size_t horizon) : mdp_(mdp), horizon_(horizon) {}
  std::vector<double> reset(Rng& rng) override;
  Step step(const std::vector<double>& action, Rng& rng) override;
  std::size_t horizon() const override { return horizon_; }

 private:
  const TabularMDP& mdp_;
  std::size_t horizon_;
  std::size_t state_ = 0;
};

/// Named tabular policy presets used by dataset-generator configs.
DiscretePolicy optimal_policy_with_explore(const TabularMDP& mdp, double explore);
DiscretePolicy uniform_policy(const TabularMDP& mdp);
DiscretePolicy constant_policy(const TabularMDP& mdp, std::size_t action);
DiscretePolicy restricted_uniform_policy(const TabularMDP& mdp,
                                         const std::vector<std::size_t>& actions);

}  // namespace cawr
