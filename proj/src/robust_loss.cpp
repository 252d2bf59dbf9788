#include "cawr/robust_loss.hpp"

#include <cmath>
#include <limits>

#include "cawr/errors.hpp"

namespace cawr {

std::string to_string(LossKind kind) {
  switch (kind) {
    case LossKind::L2: return "l2";
    case LossKind::L1: return "l1";
    case LossKind::Huber: return "huber";
    case LossKind::Flat: return "flat";
    case LossKind::Skew: return "skew";
  }
  return "l2";
}

LossKind loss_kind_from_string(const std::string& name) {
  if (name == "l2") return LossKind::L2;
  if (name == "l1") return LossKind::L1;
  if (name == "huber") return LossKind::Huber;
  if (name == "flat") return LossKind::Flat;
  if (name == "skew") return LossKind::Skew;
  throw ConfigError("unknown loss kind: " + name);
}

namespace {

void require_positive(double v, const char* name) {
  if (!(v > 0.0) || !std::isfinite(v)) {
    throw ConfigError(std::string("loss constant ") + name + " must be positive");
  }
}

}  // namespace

RobustLoss RobustLoss::l2() { return RobustLoss{LossKind::L2}; }

RobustLoss RobustLoss::l1() { return RobustLoss{LossKind::L1}; }

RobustLoss RobustLoss::huber(double kappa) {
  require_positive(kappa, "kappa");
  RobustLoss loss;
  loss.kind = LossKind::Huber;
  loss.kappa = kappa;
  return loss;
}

RobustLoss RobustLoss::flat(double c1, double c2, double c3) {
  require_positive(c1, "c1");
  require_positive(c2, "c2");
  require_positive(c3, "c3");
  RobustLoss loss;
  loss.kind = LossKind::Flat;
  loss.c1 = c1;
  loss.c2 = c2;
  loss.c3 = c3;
  loss.c4 = std::log(c2 + c3);
  return loss;
}

RobustLoss RobustLoss::skew(double c1, double c2, double c3) {
  require_positive(c1, "c1");
  require_positive(c2, "c2");
  require_positive(c3, "c3");
  RobustLoss loss;
  loss.kind = LossKind::Skew;
  loss.c1 = c1;
  loss.c2 = c2;
  loss.c3 = c3;
  loss.c4 = std::log(2.0 * c2);
  return loss;
}

RobustLoss RobustLoss::flat_for_sigma(double sigma) {
  require_positive(sigma, "sigma");
  RobustLoss loss = flat(2.0 / (sigma * sigma), 1.0 / sigma, 0.5);
  loss.sigma = sigma;
  return loss;
}

RobustLoss RobustLoss::skew_for_sigma(double sigma) {
  require_positive(sigma, "sigma");
  RobustLoss loss = skew(1.0 / (sigma * sigma), 1.0 / sigma, 1.0 / sigma);
  loss.sigma = sigma;
  return loss;
}

double loss_value(const RobustLoss& loss, double u) {
  switch (loss.kind) {
    case LossKind::L2:
      return u * u;
    case LossKind::L1:
      return std::abs(u);
    case LossKind::Huber: {
      const double au = std::abs(u);
      return au <= loss.kappa ? u * u : 2.0 * loss.kappa * au - loss.kappa * loss.kappa;
    }
    case LossKind::Flat:
      return -std::log(loss.c2 * std::exp(-loss.c1 * u * u) + loss.c3) + loss.c4;
    case LossKind::Skew: {
      const double au = std::abs(u);
      const double inner = std::exp(-loss.c1 * u * u) + 1.0 / (loss.c3 * au + 1.0);
      return -std::log(loss.c2 * inner) + loss.c4;
    }
  }
  return 0.0;
}

double loss_grad(const RobustLoss& loss, double u) {
  switch (loss.kind) {
    case LossKind::L2:
      return 2.0 * u;
    case LossKind::L1:
      return u > 0.0 ? 1.0 : (u < 0.0 ? -1.0 : 0.0);
    case LossKind::Huber: {
      const double au = std::abs(u);
      if (au <= loss.kappa) return 2.0 * u;
      return u > 0.0 ? 2.0 * loss.kappa : -2.0 * loss.kappa;
    }
    case LossKind::Flat: {
      const double e = std::exp(-loss.c1 * u * u);
      return 2.0 * loss.c1 * loss.c2 * u * e / (loss.c2 * e + loss.c3);
    }
    case LossKind::Skew: {
      if (u == 0.0) return 0.0;
      const double sign = u > 0.0 ? 1.0 : -1.0;
      const double au = std::abs(u);
      const double e = std::exp(-loss.c1 * u * u);
      const double frac = 1.0 / (loss.c3 * au + 1.0);
      const double g = e + frac;
      const double dg = -2.0 * loss.c1 * u * e - sign * loss.c3 * frac * frac;
      return -dg / g;
    }
  }
  return 0.0;
}

namespace {

/// Quantity with the sign of f'' for u > 0 (analytic, derived per kind).
double curvature_sign_value(const RobustLoss& loss, double u) {
  if (loss.kind == LossKind::Flat) {
    // sign(f'') = sign(c2 * exp(-c1 u^2) + c3 * (1 - 2 c1 u^2))
    const double e = std::exp(-loss.c1 * u * u);
    return loss.c2 * e + loss.c3 * (1.0 - 2.0 * loss.c1 * u * u);
  }
  // Skew: f = -log g + const with g = exp(-c1 u^2) + 1/(c3 u + 1), u > 0.
  // sign(f'') = sign(g'^2 - g'' * g).
  const double e = std::exp(-loss.c1 * u * u);
  const double frac = 1.0 / (loss.c3 * u + 1.0);
  const double g = e + frac;
  const double dg = -2.0 * loss.c1 * u * e - loss.c3 * frac * frac;
  const double ddg = (-2.0 * loss.c1 + 4.0 * loss.c1 * loss.c1 * u * u) * e +
                     2.0 * loss.c3 * loss.c3 * frac * frac * frac;
  return dg * dg - ddg * g;
}

}  // namespace

double convex_radius(const RobustLoss& loss) {
  if (loss.kind == LossKind::L2 || loss.kind == LossKind::L1 || loss.kind == LossKind::Huber) {
    return std::numeric_limits<double>::infinity();
  }
  double lo = 1e-9;
  if (curvature_sign_value(loss, lo) <= 0.0) return 0.0;
  double hi = lo;
  while (curvature_sign_value(loss, hi) > 0.0) {
    hi *= 2.0;
    if (hi > 1e12) return std::numeric_limits<double>::infinity();
  }
  lo = hi / 2.0;
  while (hi - lo > 1e-8) {
    const double mid = 0.5 * (lo + hi);
    if (curvature_sign_value(loss, mid) > 0.0) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

RobustLoss tighten_schedule(const RobustLoss& loss, double progress, double strength) {
  if (loss.kind != LossKind::Flat && loss.kind != LossKind::Skew) return loss;
  if (!(progress >= 0.0)) throw ValidationError("tighten_schedule: progress must be >= 0");
  if (progress == 0.0) return loss;
  RobustLoss out = loss;
  out.c1 = loss.c1 * (1.0 + strength * progress);
  return out;
}

}  // namespace cawr
