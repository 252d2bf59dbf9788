#include <cmath>

#include "cawr/errors.hpp"
#include "cawr/tasks.hpp"
#include "cawr/value_estimation.hpp"
#include "doctest.h"
#include "support/test_oracles.hpp"

using namespace cawr;

namespace {

Transition make_transition(double s, double a, double r, double s2, bool done) {
  Transition t;
  t.state = {s};
  t.action = {a};
  t.reward = r;
  t.next_state = {s2};
  t.terminal = done;
  return t;
}

/// Stateless dataset whose q-target is the action itself (see q_is_action).
Dataset two_target_data() {
  std::vector<Transition> ts;
  ts.push_back(make_transition(0, 0.0, 0.0, 0, true));
  ts.push_back(make_transition(0, 1.0, 0.0, 0, true));
  return Dataset(std::move(ts), {});
}

/// Q net over raw [s, a] input computing exactly a.
Mlp q_is_action() {
  Mlp q({2, 1});
  q.mutable_params() = {0.0, 1.0, 0.0};
  return q;
}

/// Q net computing the constant c for every input.
Mlp q_constant(double c) {
  Mlp q({2, 1});
  q.mutable_params() = {0.0, 0.0, c};
  return q;
}

double train_v_to_convergence(ValueNets& nets, const Dataset& data, const TaskEncoding& enc,
                              int iters, double lr) {
  std::vector<std::size_t> batch(data.size());
  for (std::size_t i = 0; i < batch.size(); ++i) batch[i] = i;
  double loss = 0.0;
  for (int k = 0; k < iters; ++k) loss = update_value(nets, data, enc, batch, lr);
  return loss;
}

}  // namespace

TEST_SUITE("value-estimation") {

TEST_CASE("expectile loss closed-form values") {
  CHECK(expectile_loss(2.0, 0.7) == doctest::Approx(2.8).epsilon(1e-15));
  CHECK(expectile_loss(-1.0, 0.7) == doctest::Approx(0.3).epsilon(1e-15));
  CHECK(expectile_loss(0.0, 0.3) == 0.0);
  CHECK(expectile_loss(0.0, 0.9) == 0.0);
  CHECK_THROWS_AS(expectile_loss(1.0, 0.0), ConfigError);
  CHECK_THROWS_AS(expectile_loss(1.0, 1.0), ConfigError);
}

TEST_CASE("expectile gradient matches finite differences") {
  Rng rng(31);
  for (int i = 0; i < 100; ++i) {
    double u = rng.uniform(-2.0, 2.0);
    if (std::abs(u) < 1e-3) u += 0.1;  // keep away from the kink in the weight
    const double tau = rng.uniform(0.05, 0.95);
    const double fd =
        testsupport::central_difference([&](double x) { return expectile_loss(x, tau); }, u);
    CHECK(expectile_grad(u, tau) == doctest::Approx(fd).epsilon(1e-6));
  }
}

TEST_CASE("value regression against a constant target converges to it") {
  const Dataset data = two_target_data();
  const TaskEncoding enc = TaskEncoding::raw(1, 1);
  Mlp v({1, 1});
  ValueNets nets(q_constant(2.5), std::move(v), 0.5, 0.005);
  train_v_to_convergence(nets, data, enc, 3000, 0.2);
  CHECK(nets.v.forward(std::vector<double>{0.0})[0] == doctest::Approx(2.5).epsilon(1e-6));
}

TEST_CASE("high expectile of a two-point target distribution") {
  const Dataset data = two_target_data();
  const TaskEncoding enc = TaskEncoding::raw(1, 1);
  const double tau = 0.97;
  Mlp v({1, 1});
  ValueNets nets(q_is_action(), std::move(v), tau, 0.005);
  train_v_to_convergence(nets, data, enc, 20000, 0.2);
  const double learned = nets.v.forward(std::vector<double>{0.0})[0];
  // Independent scalar-solver oracle; for equal masses on {0, 1} it is tau.
  const double expected = testsupport::expectile_of({0.0, 1.0}, {0.5, 0.5}, tau);
  CHECK(learned == doctest::Approx(expected).epsilon(1e-3));
  CHECK(std::abs(learned - 1.0) < 0.05);
}

TEST_CASE("learned expectile value is nondecreasing in tau") {
  const Dataset data = two_target_data();
  const TaskEncoding enc = TaskEncoding::raw(1, 1);
  double previous = -1.0;
  for (double tau : {0.1, 0.3, 0.5, 0.7, 0.9}) {
    Mlp v({1, 1});
    ValueNets nets(q_is_action(), std::move(v), tau, 0.005);
    train_v_to_convergence(nets, data, enc, 20000, 0.2);
    const double learned = nets.v.forward(std::vector<double>{0.0})[0];
    CHECK(learned >= previous - 1e-6);
    previous = learned;
  }
}

TEST_CASE("zero learning rate leaves value parameters unchanged") {
  const Dataset data = two_target_data();
  const TaskEncoding enc = TaskEncoding::raw(1, 1);
  Mlp v({1, 1});
  v.mutable_params() = {0.3, -0.1};
  ValueNets nets(q_constant(1.0), std::move(v), 0.5, 0.005);
  const std::vector<double> before = nets.v.params();
  const std::vector<std::size_t> batch{0, 1};
  update_value(nets, data, enc, batch, 0.0);
  CHECK(nets.v.params() == before);
}

TEST_CASE("empty batches are rejected") {
  const Dataset data = two_target_data();
  const TaskEncoding enc = TaskEncoding::raw(1, 1);
  ValueNets nets(q_constant(1.0), Mlp({1, 1}), 0.5, 0.005);
  CHECK_THROWS_AS(update_value(nets, data, enc, {}, 0.1), ValidationError);
  CHECK_THROWS_AS(update_q(nets, data, enc, {}, 0.9, 0.1), ValidationError);
}

TEST_CASE("myopic td regression converges to the rewards") {
  // One state, two actions, gamma = 0; tabular product encoding.
  std::vector<Transition> ts;
  ts.push_back(make_transition(0, 0, 1.0, 0, false));
  ts.push_back(make_transition(0, 1, -2.0, 0, false));
  const Dataset data(std::move(ts), {});
  const TaskEncoding enc = TaskEncoding::tabular_index(1, 2);
  ValueNets nets(Mlp({2, 1}), Mlp({1, 1}), 0.5, 0.005);
  const std::vector<std::size_t> batch{0, 1};
  for (int k = 0; k < 2000; ++k) update_q(nets, data, enc, batch, 0.0, 0.3);
  const std::vector<double> s{0.0};
  const std::vector<double> a0{0.0}, a1{1.0};
  CHECK(std::abs(nets.q.forward(enc.encode_state_action(s, a0))[0] - 1.0) <= 1e-6);
  CHECK(std::abs(nets.q.forward(enc.encode_state_action(s, a1))[0] + 2.0) <= 1e-6);
}

TEST_CASE("td fixed point matches the exact values on a deterministic chain") {
  // s0 -> s1 -> terminal s2, single action, gamma = 0.9.
  const double r0 = 1.0, r1 = -0.5;
  std::vector<Transition> ts;
  ts.push_back(make_transition(0, 0, r0, 1, false));
  ts.push_back(make_transition(1, 0, r1, 2, true));
  const Dataset data(std::move(ts), {});
  const TaskEncoding enc = TaskEncoding::tabular_index(3, 1);

  const double v1 = r1;             // terminal bootstrap is zero
  const double v0 = r0 + 0.9 * v1;  // exact chain values
  ValueNets nets(Mlp({3, 1}), Mlp({3, 1}), 0.5, 0.005);
  nets.v_snapshot.mutable_params() = {v0, v1, 0.0, 0.0};

  const std::vector<std::size_t> batch{0, 1};
  for (int k = 0; k < 3000; ++k) update_q(nets, data, enc, batch, 0.9, 0.3);

  const std::vector<double> s0{0.0}, s1{1.0}, a{0.0};
  const double q0 = nets.q.forward(enc.encode_state_action(s0, a))[0];
  const double q1 = nets.q.forward(enc.encode_state_action(s1, a))[0];
  CHECK(std::abs(q0 - (r0 + 0.9 * v1)) <= 1e-6);
  CHECK(std::abs(q1 - r1) <= 1e-6);  // done = true: target is r exactly
}

TEST_CASE("advantage is zero when q equals v and invariant to constant shifts") {
  const TaskEncoding enc = TaskEncoding::raw(1, 1);
  ValueNets nets(Mlp({2, 1}), Mlp({1, 1}), 0.5, 0.005);
  const std::vector<double> s{0.4}, a{-0.7};
  CHECK(advantage(nets, enc, s, a) == 0.0);

  // Shift both outputs by the same constant via the output bias.
  Rng rng(9);
  ValueNets shifted(Mlp::random_init({2, 8, 1}, rng), Mlp::random_init({1, 8, 1}, rng), 0.5, 0.005);
  const double before = advantage(shifted, enc, s, a);
  shifted.q.mutable_params().back() += 3.25;
  shifted.v.mutable_params().back() += 3.25;
  CHECK(advantage(shifted, enc, s, a) == doctest::Approx(before).epsilon(1e-12));
}

TEST_CASE("freeze discipline: targets come from snapshots, not live parameters") {
  const Dataset data = two_target_data();
  const TaskEncoding enc = TaskEncoding::raw(1, 1);
  ValueNets nets(q_is_action(), Mlp({1, 1}), 0.7, 0.005);

  nets.begin_iteration();
  const std::uint64_t snapshot_version = nets.v_snapshot.version();
  const std::uint64_t q_target_version = nets.q_target.version();
  const std::vector<std::size_t> batch{0, 1};
  update_value(nets, data, enc, batch, 0.1);
  update_q(nets, data, enc, batch, 0.9, 0.1);
  // Live nets moved; frozen copies did not.
  CHECK(nets.v_snapshot.version() == snapshot_version);
  CHECK(nets.q_target.version() == q_target_version);
  CHECK(nets.v.version() > 0);
  CHECK(nets.q.version() > 0);

  // The td target must use the snapshot V, not the live V.
  ValueNets probe(Mlp({2, 1}), Mlp({1, 1}), 0.5, 0.005);
  probe.v_snapshot.mutable_params() = {0.0, 5.0};  // V_k = 5 everywhere
  probe.v.mutable_params() = {0.0, -100.0};        // live V is wildly different
  std::vector<Transition> ts;
  ts.push_back(make_transition(0, 0, 1.0, 0, false));
  const Dataset chain(std::move(ts), {});
  const std::vector<std::size_t> one{0};
  for (int k = 0; k < 4000; ++k) update_q(probe, chain, enc, one, 0.5, 0.3);
  const std::vector<double> s{0.0}, a{0.0};
  // Fixed point r + gamma * V_k = 1 + 0.5 * 5 = 3.5.
  CHECK(probe.q.forward(enc.encode_state_action(s, a))[0] == doctest::Approx(3.5).epsilon(1e-6));
}

TEST_CASE("soft target update blends toward the live network") {
  ValueNets nets(q_constant(0.0), Mlp({1, 1}), 0.5, 0.5);
  nets.q.mutable_params() = {0.0, 0.0, 4.0};
  nets.soft_update_q_target();
  CHECK(nets.q_target.params()[2] == doctest::Approx(2.0));  // (1 - 0.5) * 0 + 0.5 * 4
  nets.soft_update_q_target();
  CHECK(nets.q_target.params()[2] == doctest::Approx(3.0));
}

TEST_CASE("learned advantages converge to the exact ones on a tabular problem") {
  // Two-state chain with known dynamics; tau = 0.5 makes the expectile the
  // behavior-policy mean, so exact policy evaluation is the oracle.
  std::vector<double> kernel{
      0.7, 0.3,  // s0 a0
      0.2, 0.8,  // s0 a1
      0.4, 0.6,  // s1 a0
      0.9, 0.1,  // s1 a1
  };
  std::vector<double> rewards{1.0, -0.5, 0.25, 2.0};
  TabularMDP mdp(2, 2, kernel, rewards, 0.9, {1.0, 0.0});
  DiscretePolicy behavior{{0.6, 0.4}, {0.3, 0.7}};
  DiscreteMixture mix{behavior, behavior, 0.0};
  const Dataset data = generate_dataset(mdp, mix, 500, 40, 77);

  const TaskEncoding enc = TaskEncoding::tabular_index(2, 2);
  ValueNets nets(Mlp({4, 1}), Mlp({2, 1}), 0.5, 0.01);
  Rng sampler(123);
  for (int k = 0; k < 2000; ++k) {
    nets.begin_iteration();
    std::vector<std::size_t> batch(50);
    for (auto& i : batch) i = sampler.uniform_index(data.size());
    update_value(nets, data, enc, batch, 0.05);
    update_q(nets, data, enc, batch, 0.9, 0.05);
    nets.soft_update_q_target();
  }

  const QV exact = exact_q_v(mdp, behavior);
  for (std::size_t s = 0; s < 2; ++s) {
    for (std::size_t a = 0; a < 2; ++a) {
      const std::vector<double> sv{static_cast<double>(s)}, av{static_cast<double>(a)};
      const double learned = advantage(nets, enc, sv, av);
      CHECK(std::abs(learned - exact.advantage(mdp, s, a)) <= 0.05);
    }
  }
}

}  // TEST_SUITE
