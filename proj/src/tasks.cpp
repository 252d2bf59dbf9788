#include "cawr/tasks.hpp"

#include <algorithm>
#include <cmath>

#include "cawr/errors.hpp"

namespace cawr {

std::vector<double> sample_action(const ActionDist& dist, Rng& rng) {
  if (const auto* point = std::get_if<PointAction>(&dist)) {
    return point->action;
  }
  const auto& gauss = std::get<GaussianAction>(dist);
  std::vector<double> a(gauss.mean.size());
  for (std::size_t d = 0; d < a.size(); ++d) a[d] = rng.normal(gauss.mean[d], gauss.stddev);
  return a;
}

double action_mean_1d(const ActionDist& dist) {
  if (const auto* point = std::get_if<PointAction>(&dist)) return point->action.at(0);
  return std::get<GaussianAction>(dist).mean.at(0);
}

namespace {

void check_epsilon(double epsilon) {
  if (!(epsilon >= 0.0 && epsilon <= 1.0)) {
    throw ConfigError("mixture epsilon must lie in [0, 1], got " + std::to_string(epsilon));
  }
}

}  // namespace

TabularMDP make_gridworld(const GridworldSpec& spec) {
  const std::size_t w = spec.width, h = spec.height;
  const std::size_t n = w * h;
  const std::size_t na = 4;
  const std::size_t goal = n - 1;

  std::vector<double> kernel(n * na * n, 0.0);
  std::vector<double> rewards(n * na, 0.0);
  std::vector<std::uint8_t> terminal(n, 0);
  terminal[goal] = 1;

  for (std::size_t s = 0; s < n; ++s) {
    const std::size_t x = s % w;
    const std::size_t y = s / w;
    for (std::size_t a = 0; a < na; ++a) {
      std::size_t nx = x, ny = y;
      if (s != goal) {
        switch (a) {
          case 0: nx = x > 0 ? x - 1 : x; break;      // left
          case 1: ny = y > 0 ? y - 1 : y; break;      // up
          case 2: ny = y + 1 < h ? y + 1 : y; break;  // down
          case 3: nx = x + 1 < w ? x + 1 : x; break;  // right
        }
      }
      const std::size_t s2 = ny * w + nx;
      kernel[(s * na + a) * n + s2] = 1.0;
      if (s == goal) {
        rewards[s * na + a] = 0.0;
      } else {
        rewards[s * na + a] = (s2 == goal) ? spec.goal_reward : spec.step_reward;
      }
    }
  }

  std::vector<double> d0(n, 0.0);
  d0[0] = 1.0;
  return TabularMDP(n, na, std::move(kernel), std::move(rewards), spec.gamma, std::move(d0),
                    std::move(terminal));
}

Dataset generate_dataset(const TabularMDP& mdp, const DiscreteMixture& behavior,
                         std::size_t n_episodes, std::size_t horizon, std::uint64_t seed) {
  check_epsilon(behavior.epsilon);
  if (n_episodes == 0) throw ConfigError("need at least one episode");
  validate_policy(behavior.good, mdp.n_actions());
  validate_policy(behavior.poor, mdp.n_actions());

  Rng rng(seed);
  std::vector<Transition> transitions;
  transitions.reserve(n_episodes * horizon);

  for (std::size_t ep = 0; ep < n_episodes; ++ep) {
    std::size_t s = rng.categorical(mdp.initial_dist());
    for (std::size_t t = 0; t < horizon; ++t) {
      const bool poor = rng.bernoulli(behavior.epsilon);
      const auto& row = poor ? behavior.poor[s] : behavior.good[s];
      const std::size_t a = rng.categorical(row);

      std::vector<double> next_probs(mdp.n_states());
      for (std::size_t s2 = 0; s2 < mdp.n_states(); ++s2) next_probs[s2] = mdp.p(s, a, s2);
      const std::size_t s2 = rng.categorical(next_probs);

      Transition tr;
      tr.state = {static_cast<double>(s)};
      tr.action = {static_cast<double>(a)};
      tr.reward = mdp.r(s, a);
      tr.next_state = {static_cast<double>(s2)};
      tr.terminal = mdp.is_terminal(s2);
      transitions.push_back(std::move(tr));

      if (mdp.is_terminal(s2)) break;
      s = s2;
    }
  }

  DatasetMeta meta;
  meta.state_dim = 1;
  meta.action_dim = 1;
  meta.epsilon = behavior.epsilon;
  meta.seed = seed;
  meta.reward_bound = mdp.reward_bound();
  meta.good_policy = "discrete-good";
  meta.poor_policy = "discrete-poor";
  return Dataset(std::move(transitions), std::move(meta));
}

Dataset generate_dataset(const BanditTask& task, const ContinuousMixture& behavior,
                         std::size_t n_episodes, std::uint64_t seed) {
  check_epsilon(behavior.epsilon);
  if (n_episodes == 0) throw ConfigError("need at least one episode");

  Rng rng(seed);
  std::vector<Transition> transitions;
  transitions.reserve(n_episodes);
  for (std::size_t ep = 0; ep < n_episodes; ++ep) {
    const bool poor = rng.bernoulli(behavior.epsilon);
    const std::vector<double> a = sample_action(poor ? behavior.poor : behavior.good, rng);
    const double diff = a.at(0) - task.target;
    Transition tr;
    tr.state = {0.0};
    tr.action = a;
    tr.reward = -diff * diff;
    tr.next_state = {0.0};
    tr.terminal = true;
    transitions.push_back(std::move(tr));
  }

  DatasetMeta meta;
  meta.state_dim = 1;
  meta.action_dim = 1;
  meta.epsilon = behavior.epsilon;
  meta.seed = seed;
  meta.reward_bound = 0.0;
  meta.good_policy = "continuous-good";
  meta.poor_policy = "continuous-poor";
  return Dataset(std::move(transitions), std::move(meta));
}

Env::Step BanditEnv::step(const std::vector<double>& action, Rng&) {
  const double diff = action.at(0) - task_.target;
  return Step{{0.0}, -diff * diff, true};
}

std::vector<double> TabularEnv::reset(Rng& rng) {
  state_ = rng.categorical(mdp_.initial_dist());
  return {static_cast<double>(state_)};
}

Env::Step TabularEnv::step(const std::vector<double>& action, Rng& rng) {
  const auto a = static_cast<std::size_t>(
      std::clamp(action.at(0), 0.0, static_cast<double>(mdp_.n_actions() - 1)));
  std::vector<double> next_probs(mdp_.n_states());
  for (std::size_t s2 = 0; s2 < mdp_.n_states(); ++s2) next_probs[s2] = mdp_.p(state_, a, s2);
  const std::size_t s2 = rng.categorical(next_probs);
  const double reward = mdp_.r(state_, a);
  const bool done = mdp_.is_terminal(s2);
  state_ = s2;
  return Step{{static_cast<double>(s2)}, reward, done};
}

DiscretePolicy optimal_policy_with_explore(const TabularMDP& mdp, double explore) {
  if (!(explore >= 0.0 && explore <= 1.0)) throw ConfigError("explore must lie in [0, 1]");
  const OptimalSolution sol = solve_optimal(mdp);
  DiscretePolicy policy = sol.greedy;
  const double u = explore / static_cast<double>(mdp.n_actions());
  for (auto& row : policy) {
    for (double& p : row) p = p * (1.0 - explore) + u;
  }
  return policy;
}

DiscretePolicy uniform_policy(const TabularMDP& mdp) {
  return DiscretePolicy(mdp.n_states(),
                        std::vector<double>(mdp.n_actions(), 1.0 / static_cast<double>(mdp.n_actions())));
}

DiscretePolicy constant_policy(const TabularMDP& mdp, std::size_t action) {
  if (action >= mdp.n_actions()) throw ConfigError("constant policy action out of range");
  DiscretePolicy policy(mdp.n_states(), std::vector<double>(mdp.n_actions(), 0.0));
  for (auto& row : policy) row[action] = 1.0;
  return policy;
}

DiscretePolicy restricted_uniform_policy(const TabularMDP& mdp,
                                         const std::vector<std::size_t>& actions) {
  if (actions.empty()) throw ConfigError("restricted policy needs at least one action");
  DiscretePolicy policy(mdp.n_states(), std::vector<double>(mdp.n_actions(), 0.0));
  const double p = 1.0 / static_cast<double>(actions.size());
  for (auto& row : policy) {
    for (std::size_t a : actions) {
      if (a >= mdp.n_actions()) throw ConfigError("restricted policy action out of range");
      row[a] += p;
    }
  }
  return policy;
}

}  // namespace cawr
