#include <cmath>

#include "cawr/approximator.hpp"
#include "cawr/errors.hpp"
#include "doctest.h"
#include "support/test_oracles.hpp"

using namespace cawr;

TEST_SUITE("approximator") {

TEST_CASE("zero-initialized network outputs zero") {
  Mlp net({3, 8, 2});
  const std::vector<double> input{0.3, -0.2, 1.1};
  for (double y : net.forward(input)) CHECK(y == 0.0);
}

TEST_CASE("identity-initialized linear layer passes input through") {
  Mlp net({3, 3});
  auto& p = net.mutable_params();
  for (std::size_t i = 0; i < 3; ++i) p[i * 3 + i] = 1.0;  // weights row-major, biases after
  const std::vector<double> input{0.5, -1.5, 2.0};
  const std::vector<double> out = net.forward(input);
  for (std::size_t i = 0; i < 3; ++i) CHECK(out[i] == input[i]);
}

TEST_CASE("fixed seed forward pass is reproducible") {
  const std::vector<double> input{0.1, -0.7};
  Rng rng_a(2024), rng_b(2024);
  const Mlp a = Mlp::random_init({2, 16, 16, 1}, rng_a);
  const Mlp b = Mlp::random_init({2, 16, 16, 1}, rng_b);
  CHECK(a.forward(input)[0] == b.forward(input)[0]);
}

TEST_CASE("linear layer gradients match the closed form") {
  Mlp net({2, 2});
  Rng rng(3);
  auto& p = net.mutable_params();
  for (double& w : p) w = rng.uniform(-1.0, 1.0);

  const std::vector<double> input{0.7, -0.4};
  Mlp::Tape tape;
  net.forward(input, tape);
  const std::vector<double> out_grad{1.5, -2.0};
  std::vector<double> grad(net.param_count(), 0.0);
  net.backward(tape, out_grad, grad);

  // d/dW[i][j] = out_grad[i] * input[j], d/db[i] = out_grad[i].
  for (std::size_t i = 0; i < 2; ++i) {
    for (std::size_t j = 0; j < 2; ++j) {
      CHECK(grad[i * 2 + j] == doctest::Approx(out_grad[i] * input[j]).epsilon(1e-15));
    }
    CHECK(grad[4 + i] == doctest::Approx(out_grad[i]).epsilon(1e-15));
  }
}

TEST_CASE("zero output gradient yields zero parameter gradient") {
  Rng rng(8);
  Mlp net = Mlp::random_init({2, 8, 1}, rng);
  Mlp::Tape tape;
  net.forward(std::vector<double>{0.2, 0.4}, tape);
  std::vector<double> grad(net.param_count(), 0.0);
  net.backward(tape, std::vector<double>{0.0}, grad);
  for (double g : grad) CHECK(g == 0.0);
}

TEST_CASE("backward matches finite differences on a random 2x16x16x1 network") {
  Rng rng(11);
  Mlp net = Mlp::random_init({2, 16, 16, 1}, rng);
  const std::vector<double> input{0.37, -0.81};

  Mlp::Tape tape;
  net.forward(input, tape);
  std::vector<double> analytic(net.param_count(), 0.0);
  net.backward(tape, std::vector<double>{1.0}, analytic);

  Mlp probe = net;
  const auto value = [&](const std::vector<double>& params) {
    probe.mutable_params() = params;
    return probe.forward(input)[0];
  };
  // 100 random parameter probes.
  for (int k = 0; k < 100; ++k) {
    const std::size_t i = rng.uniform_index(net.param_count());
    std::vector<double> params = net.params();
    const auto f = [&](double w) {
      params[i] = w;
      return value(params);
    };
    const double fd = testsupport::central_difference(f, net.params()[i]);
    CHECK(analytic[i] == doctest::Approx(fd).epsilon(1e-5));
  }
}

TEST_CASE("sgd step arithmetic") {
  Mlp net({1, 1});
  net.mutable_params() = {1.0, 0.0};  // weight 1, bias 0

  SUBCASE("zero learning rate leaves parameters unchanged") {
    net.sgd_step({2.0, 2.0}, 0.0);
    CHECK(net.params()[0] == 1.0);
    CHECK(net.params()[1] == 0.0);
  }
  SUBCASE("single scalar step") {
    net.sgd_step({2.0, 0.0}, 0.1);
    CHECK(net.params()[0] == doctest::Approx(0.8).epsilon(1e-15));
  }
  SUBCASE("non-finite gradients abort") {
    CHECK_THROWS_AS(net.sgd_step({std::nan(""), 0.0}, 0.1), ValidationError);
  }
}

TEST_CASE("sgd drives a 1-D quadratic to its optimum within 1e3 steps") {
  // minimize (p - 3)^2 by explicit gradient steps on a 1-parameter net.
  Mlp net({1, 1});
  net.mutable_params() = {0.0, 0.0};
  for (int step = 0; step < 1000; ++step) {
    const double p = net.params()[0];
    net.sgd_step({2.0 * (p - 3.0), 0.0}, 0.1);
  }
  CHECK(std::abs(net.params()[0] - 3.0) <= 1e-8);
}

TEST_CASE("stale tapes are rejected after a parameter update") {
  Rng rng(4);
  Mlp net = Mlp::random_init({2, 4, 1}, rng);
  Mlp::Tape tape;
  net.forward(std::vector<double>{0.1, 0.2}, tape);
  net.sgd_step(std::vector<double>(net.param_count(), 0.0), 0.1);  // bumps the version
  std::vector<double> grad(net.param_count(), 0.0);
  CHECK_THROWS_AS(net.backward(tape, std::vector<double>{1.0}, grad), ValidationError);
}

TEST_CASE("checkpoint serialization round trip") {
  Rng rng(10);
  const Mlp net = Mlp::random_init({3, 8, 2}, rng);
  const Mlp loaded = Mlp::deserialize(net.serialize());
  CHECK(loaded.layer_sizes() == net.layer_sizes());
  CHECK(loaded.params() == net.params());
  CHECK_THROWS_AS(Mlp::deserialize("{}"), ValidationError);
}

TEST_CASE("dimension mismatches are validation errors") {
  Mlp net({2, 1});
  CHECK_THROWS_AS(net.forward(std::vector<double>{1.0}), ValidationError);
  CHECK_THROWS_AS(net.sgd_step({1.0}, 0.1), ValidationError);
}

}  // TEST_SUITE
