#include <cmath>
#include <limits>

#include "cawr/errors.hpp"
#include "cawr/robust_loss.hpp"
#include "cawr/rng.hpp"
#include "doctest.h"
#include "support/test_oracles.hpp"

using namespace cawr;

namespace {

std::vector<RobustLoss> all_kinds() {
  return {RobustLoss::l2(), RobustLoss::l1(), RobustLoss::huber(0.2),
          RobustLoss::flat(1.0, 1.0, 0.5), RobustLoss::skew_for_sigma(0.5)};
}

/// Probe points that avoid each kind's nondifferentiable set.
bool differentiable_at(const RobustLoss& loss, double u) {
  switch (loss.kind) {
    case LossKind::L1:
    case LossKind::Skew:
      return std::abs(u) > 1e-3;
    case LossKind::Huber:
      return std::abs(std::abs(u) - loss.kappa) > 1e-3 && std::abs(u) > 0.0;
    default:
      return true;
  }
}

}  // namespace

TEST_SUITE("robust-loss") {

TEST_CASE("loss values match the closed forms") {
  CHECK(loss_value(RobustLoss::l1(), -0.3) == doctest::Approx(0.3).epsilon(1e-15));
  CHECK(loss_value(RobustLoss::huber(0.2), 0.1) == doctest::Approx(0.01).epsilon(1e-15));
  CHECK(loss_value(RobustLoss::huber(0.2), 0.5) == doctest::Approx(0.16).epsilon(1e-15));
  CHECK(loss_value(RobustLoss::l2(), 0.5) == doctest::Approx(0.25).epsilon(1e-15));
}

TEST_CASE("flat loss plateaus at log((c2 + c3) / c3)") {
  const RobustLoss flat = RobustLoss::flat(1.0, 1.0, 0.5);
  CHECK(loss_value(flat, 0.0) == 0.0);
  // log(1.5) - log(0.5) = log(3) ~ 1.0986.
  CHECK(loss_value(flat, 1e3) == doctest::Approx(std::log(3.0)).epsilon(1e-9));
}

TEST_CASE("gradients match the stated values") {
  CHECK(loss_grad(RobustLoss::l2(), 0.5) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(loss_grad(RobustLoss::l1(), 0.4) == 1.0);
  CHECK(loss_grad(RobustLoss::l1(), -0.4) == -1.0);
  CHECK(loss_grad(RobustLoss::l1(), 0.0) == 0.0);  // subgradient choice
  CHECK(std::abs(loss_grad(RobustLoss::flat(1.0, 1.0, 0.5), 10.0)) < 1e-8);
}

TEST_CASE("gradients match central finite differences where differentiable") {
  Rng rng(77);
  for (const RobustLoss& loss : all_kinds()) {
    int checked = 0;
    while (checked < 100) {
      const double u = rng.uniform(-3.0, 3.0);
      if (!differentiable_at(loss, u)) continue;
      ++checked;
      const double fd = testsupport::central_difference(
          [&](double x) { return loss_value(loss, x); }, u);
      const double analytic = loss_grad(loss, u);
      CHECK(analytic == doctest::Approx(fd).epsilon(1e-6));
    }
  }
}

TEST_CASE("every kind is nonnegative and zero at the origin") {
  Rng rng(12);
  for (const RobustLoss& loss : all_kinds()) {
    CHECK(loss_value(loss, 0.0) == doctest::Approx(0.0).epsilon(1e-15));
    for (int i = 0; i < 200; ++i) {
      CHECK(loss_value(loss, rng.uniform(-100.0, 100.0)) >= 0.0);
    }
  }
}

TEST_CASE("gradient magnitudes fall below the squared loss beyond a crossover") {
  const RobustLoss l2 = RobustLoss::l2();
  for (const RobustLoss& loss : all_kinds()) {
    if (loss.kind == LossKind::L2) continue;
    // Log-spaced grid over [1e-3, 1e3]: find the crossover, then require
    // strict dominance beyond it.
    double crossover = -1.0;
    for (double u = 1e-3; u <= 1e3; u *= 1.2) {
      if (std::abs(loss_grad(loss, u)) < std::abs(loss_grad(l2, u))) {
        crossover = u;
        break;
      }
    }
    REQUIRE(crossover > 0.0);
    for (double u = crossover; u <= 1e3; u *= 1.2) {
      CHECK(std::abs(loss_grad(loss, u)) < std::abs(loss_grad(l2, u)));
      CHECK(std::abs(loss_grad(loss, -u)) < std::abs(loss_grad(l2, -u)));
    }
  }
}

TEST_CASE("flat gradient vanishes for far-out residuals") {
  const RobustLoss flat = RobustLoss::flat_for_sigma(0.5);
  CHECK(std::abs(loss_grad(flat, 1e3)) < 1e-6);
}

TEST_CASE("huber agrees with the squared loss inside kappa") {
  const RobustLoss huber = RobustLoss::huber(0.37);
  for (double u = -0.37; u <= 0.37; u += 0.01) {
    CHECK(loss_grad(huber, u) == 2.0 * u);
    CHECK(loss_value(huber, u) == u * u);
  }
}

TEST_CASE("convex radius is infinite for globally convex kinds") {
  CHECK(std::isinf(convex_radius(RobustLoss::l2())));
  CHECK(std::isinf(convex_radius(RobustLoss::l1())));
  CHECK(std::isinf(convex_radius(RobustLoss::huber(0.1))));
  CHECK(std::isinf(convex_radius(RobustLoss::huber(5.0))));
}

TEST_CASE("flat convex radius is a sign change of the second derivative") {
  const RobustLoss flat = RobustLoss::flat(1.0, 1.0, 0.5);
  const double r = convex_radius(flat);
  REQUIRE(r > 0.0);
  REQUIRE(std::isfinite(r));
  const auto second = [&](double u) {
    const double h = 1e-5;
    return (loss_grad(flat, u + h) - loss_grad(flat, u - h)) / (2.0 * h);
  };
  CHECK(second(r - 1e-4) > 0.0);
  CHECK(second(r + 1e-4) < 0.0);
}

TEST_CASE("skew has a finite convex radius at the defaults") {
  const double r = convex_radius(RobustLoss::skew_for_sigma(0.5));
  CHECK(r > 0.0);
  CHECK(std::isfinite(r));
}

TEST_CASE("tightening shrinks the convex region monotonically") {
  for (const RobustLoss& loss : {RobustLoss::flat_for_sigma(0.5), RobustLoss::skew_for_sigma(0.5)}) {
    double previous = std::numeric_limits<double>::infinity();
    for (int k = 0; k <= 10; ++k) {
      const double progress = static_cast<double>(k) / 10.0;
      const RobustLoss tightened = tighten_schedule(loss, progress);
      const double r = convex_radius(tightened);
      CHECK(r <= previous + 1e-12);
      previous = r;
      if (k == 0) {
        CHECK(tightened.c1 == loss.c1);  // identity at the start
        CHECK(tightened.c2 == loss.c2);
        CHECK(tightened.c3 == loss.c3);
      }
      CHECK(tightened.kind == loss.kind);
    }
  }
}

TEST_CASE("tightening is a no-op for the squared loss") {
  const RobustLoss l2 = RobustLoss::l2();
  const RobustLoss after = tighten_schedule(l2, 0.8);
  CHECK(after.kind == LossKind::L2);
  CHECK(after.c1 == l2.c1);
}

TEST_CASE("table-derived default constants") {
  const RobustLoss flat = RobustLoss::flat_for_sigma(0.5);
  CHECK(flat.c1 == doctest::Approx(8.0));   // 2 / sigma^2
  CHECK(flat.c2 == doctest::Approx(2.0));   // 1 / sigma
  CHECK(flat.c3 == doctest::Approx(0.5));
  const RobustLoss skew = RobustLoss::skew_for_sigma(0.5);
  CHECK(skew.c1 == doctest::Approx(4.0));   // 1 / sigma^2
  CHECK(skew.c2 == doctest::Approx(2.0));   // 1 / sigma
  CHECK(skew.c3 == doctest::Approx(2.0));   // 1 / sigma
}

TEST_CASE("nonpositive constants are configuration errors") {
  CHECK_THROWS_AS(RobustLoss::huber(0.0), ConfigError);
  CHECK_THROWS_AS(RobustLoss::flat(-1.0, 1.0, 0.5), ConfigError);
  CHECK_THROWS_AS(RobustLoss::skew(1.0, 0.0, 0.5), ConfigError);
}

}  // TEST_SUITE
