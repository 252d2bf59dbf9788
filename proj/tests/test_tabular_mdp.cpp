#include <cmath>

#include "cawr/errors.hpp"
#include "cawr/rng.hpp"
#include "cawr/tabular_mdp.hpp"
#include "cawr/tasks.hpp"
#include "doctest.h"
#include "support/test_oracles.hpp"

using namespace cawr;

namespace {

TabularMDP random_mdp(std::size_t n, std::size_t na, double gamma, Rng& rng) {
  std::vector<double> kernel(n * na * n);
  std::vector<double> rewards(n * na);
  for (std::size_t sa = 0; sa < n * na; ++sa) {
    double sum = 0.0;
    for (std::size_t s2 = 0; s2 < n; ++s2) {
      kernel[sa * n + s2] = -std::log(1.0 - rng.uniform());
      sum += kernel[sa * n + s2];
    }
    for (std::size_t s2 = 0; s2 < n; ++s2) kernel[sa * n + s2] /= sum;
    rewards[sa] = rng.uniform(-1.0, 1.0);
  }
  std::vector<double> d0(n, 1.0 / static_cast<double>(n));
  return TabularMDP(n, na, std::move(kernel), std::move(rewards), gamma, std::move(d0));
}

DiscretePolicy random_policy(std::size_t n, std::size_t na, Rng& rng) {
  DiscretePolicy policy(n, std::vector<double>(na));
  for (auto& row : policy) {
    double sum = 0.0;
    for (double& p : row) {
      p = -std::log(1.0 - rng.uniform());
      sum += p;
    }
    for (double& p : row) p /= sum;
  }
  return policy;
}

}  // namespace

TEST_SUITE("tabular-mdp") {

TEST_CASE("constructor validates kernel rows and the initial distribution") {
  std::vector<double> bad_kernel{0.5, 0.4};  // sums to 0.9
  CHECK_THROWS_AS(TabularMDP(2, 1, bad_kernel, {0.0, 0.0}, 0.9, {1.0, 0.0}), ValidationError);

  std::vector<double> kernel{1.0, 0.0, 0.0, 1.0};
  CHECK_THROWS_AS(TabularMDP(2, 1, kernel, {0.0, 0.0}, 1.5, {1.0, 0.0}), ValidationError);
  CHECK_THROWS_AS(TabularMDP(2, 1, kernel, {0.0, 0.0}, 0.9, {0.7, 0.7}), ValidationError);
}

TEST_CASE("terminal states must be absorbing with zero reward") {
  std::vector<double> kernel{1.0, 0.0, 0.0, 1.0};
  std::vector<double> rewards{0.0, 1.0};  // terminal state pays reward
  CHECK_THROWS_AS(TabularMDP(2, 1, kernel, rewards, 0.9, {1.0, 0.0}, {0, 1}), ValidationError);
}

TEST_CASE("myopic case: gamma = 0 gives Q = r exactly") {
  Rng rng(7);
  const TabularMDP mdp = random_mdp(4, 3, 0.0, rng);
  const DiscretePolicy policy = random_policy(4, 3, rng);
  const QV qv = exact_q_v(mdp, policy);
  for (std::size_t s = 0; s < 4; ++s) {
    for (std::size_t a = 0; a < 3; ++a) {
      CHECK(qv.q[s * 3 + a] == doctest::Approx(mdp.r(s, a)).epsilon(1e-14));
    }
  }
}

TEST_CASE("geometric series: single state, r = 1, gamma = 0.5 gives V = 2") {
  TabularMDP mdp(1, 1, {1.0}, {1.0}, 0.5, {1.0});
  const QV qv = exact_q_v(mdp, {{1.0}});
  CHECK(qv.v[0] == doctest::Approx(2.0).epsilon(1e-12));
}

TEST_CASE("policy evaluation matches a Monte-Carlo oracle on a 2-state chain") {
  std::vector<double> kernel{
      0.7, 0.3,  // s0 a0
      0.2, 0.8,  // s0 a1
      0.4, 0.6,  // s1 a0
      0.9, 0.1,  // s1 a1
  };
  std::vector<double> rewards{1.0, -0.5, 0.25, 2.0};
  TabularMDP mdp(2, 2, kernel, rewards, 0.9, {1.0, 0.0});
  DiscretePolicy policy{{0.6, 0.4}, {0.3, 0.7}};

  const QV qv = exact_q_v(mdp, policy);
  double v0 = 0.0;
  for (std::size_t s = 0; s < 2; ++s) v0 += mdp.initial_dist()[s] * qv.v[s];

  // 10^4 episodes x 100 steps = 10^6 simulated steps.
  const testsupport::McEstimate mc = testsupport::monte_carlo_return(mdp, policy, 10000, 100, 42);
  CHECK(std::abs(mc.mean - v0) <= 3.0 * mc.std_error);
}

TEST_CASE("bellman residual stays below 1e-9 elementwise on random instances") {
  Rng rng(21);
  for (int trial = 0; trial < 20; ++trial) {
    const std::size_t n = 2 + rng.uniform_index(6);
    const std::size_t na = 1 + rng.uniform_index(3);
    const TabularMDP mdp = random_mdp(n, na, rng.uniform(0.3, 0.99), rng);
    const DiscretePolicy policy = random_policy(n, na, rng);
    const QV qv = exact_q_v(mdp, policy);
    for (std::size_t s = 0; s < n; ++s) {
      for (std::size_t a = 0; a < na; ++a) {
        double next = 0.0;
        for (std::size_t s2 = 0; s2 < n; ++s2) next += mdp.p(s, a, s2) * qv.v[s2];
        CHECK(std::abs(qv.q[s * na + a] - (mdp.r(s, a) + mdp.gamma() * next)) <= 1e-9);
      }
    }
  }
}

TEST_CASE("non-stochastic policy is rejected") {
  TabularMDP mdp(1, 2, {0.5, 0.5, 1.0, 0.0}, {0.0, 0.0}, 0.9, {1.0});
  CHECK_THROWS_AS(exact_q_v(mdp, {{0.7, 0.7}}), ValidationError);
}

TEST_CASE("value iteration solves the gridworld") {
  GridworldSpec spec;
  spec.width = 2;
  spec.height = 2;
  const TabularMDP mdp = make_gridworld(spec);
  const OptimalSolution sol = solve_optimal(mdp);
  // Two steps to the goal: -1 then +10, discounted.
  CHECK(sol.v[0] == doctest::Approx(-1.0 + spec.gamma * 10.0).epsilon(1e-10));
  CHECK(policy_return(mdp, sol.greedy) == doctest::Approx(sol.v[0]).epsilon(1e-10));
}

TEST_CASE("empirical mdp recovers a deterministic model from one visit per pair") {
  GridworldSpec spec;
  spec.width = 3;
  spec.height = 3;
  const TabularMDP mdp = make_gridworld(spec);
  // Enumerate every (s, a) exactly once.
  std::vector<Transition> ts;
  for (std::size_t s = 0; s < mdp.n_states(); ++s) {
    for (std::size_t a = 0; a < mdp.n_actions(); ++a) {
      std::size_t s2 = 0;
      for (std::size_t k = 0; k < mdp.n_states(); ++k) {
        if (mdp.p(s, a, k) == 1.0) s2 = k;
      }
      Transition t;
      t.state = {static_cast<double>(s)};
      t.action = {static_cast<double>(a)};
      t.reward = mdp.r(s, a);
      t.next_state = {static_cast<double>(s2)};
      t.terminal = mdp.is_terminal(s2);
      ts.push_back(std::move(t));
    }
  }
  const Dataset data(std::move(ts), {});
  const EmpiricalMdp emp = empirical_mdp(data, UniformBinner::identity(mdp.n_states()),
                                         UniformBinner::identity(mdp.n_actions()), mdp.gamma());
  for (std::size_t s = 0; s < mdp.n_states(); ++s) {
    for (std::size_t a = 0; a < mdp.n_actions(); ++a) {
      CHECK(emp.is_observed(s, a));
      for (std::size_t s2 = 0; s2 < mdp.n_states(); ++s2) {
        CHECK(emp.mdp.p(s, a, s2) == doctest::Approx(mdp.p(s, a, s2)).epsilon(1e-14));
      }
      CHECK(emp.mdp.r(s, a) == doctest::Approx(mdp.r(s, a)).epsilon(1e-14));
    }
  }
}

TEST_CASE("unvisited pairs are flagged absent rather than zero-filled") {
  std::vector<Transition> ts;
  Transition t;
  t.state = {0.0};
  t.action = {0.0};
  t.reward = 1.0;
  t.next_state = {1.0};
  t.terminal = false;
  ts.push_back(t);
  const Dataset data(std::move(ts), {});
  UniformBinner states = UniformBinner::identity(2);
  UniformBinner actions = UniformBinner::identity(2);
  const EmpiricalMdp emp = empirical_mdp(data, states, actions, 0.9);
  CHECK(emp.is_observed(0, 0));
  CHECK_FALSE(emp.is_observed(0, 1));
  CHECK_FALSE(emp.is_observed(1, 0));
  CHECK_FALSE(emp.state_observed[1]);
  // Absent rows stay valid distributions (placeholder self-loop).
  CHECK(emp.mdp.p(1, 0, 1) == 1.0);
}

TEST_CASE("empirical kernel concentrates on the truth with 1e5 transitions") {
  Rng rng(5);
  const TabularMDP mdp = random_mdp(3, 2, 0.9, rng);
  const DiscretePolicy behavior = random_policy(3, 2, rng);
  DiscreteMixture mix{behavior, behavior, 0.0};
  const Dataset data = generate_dataset(mdp, mix, 1000, 100, 31);
  REQUIRE(data.size() == 100000);
  const EmpiricalMdp emp = empirical_mdp(data, UniformBinner::identity(3),
                                         UniformBinner::identity(2), 0.9);
  for (std::size_t s = 0; s < 3; ++s) {
    for (std::size_t a = 0; a < 2; ++a) {
      REQUIRE(emp.is_observed(s, a));
      double l1 = 0.0;
      for (std::size_t s2 = 0; s2 < 3; ++s2) l1 += std::abs(emp.mdp.p(s, a, s2) - mdp.p(s, a, s2));
      CHECK(l1 <= 0.05);
    }
  }
}

TEST_CASE("uniform binner maps values into cells") {
  UniformBinner binner{{0.0, -1.0}, {1.0, 1.0}, {4, 2}};
  CHECK(binner.n_cells() == 8);
  CHECK(binner.cell({0.0, -1.0}) == 0);
  CHECK(binner.cell({0.99, 0.99}) == 7);
  CHECK(binner.cell({1.0, 1.0}) == 7);   // upper edge clamps into the last bin
  CHECK(binner.cell({-5.0, -5.0}) == 0); // out of range clamps
  CHECK_THROWS_AS(binner.cell({0.5}), ValidationError);
}

}  // TEST_SUITE
