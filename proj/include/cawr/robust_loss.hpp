#pragma once

#include <string>

namespace cawr {

enum class LossKind { L2, L1, Huber, Flat, Skew };

std::string to_string(LossKind kind);
LossKind loss_kind_from_string(const std::string& name);

/// Per-coordinate regression loss f(u), u = a_i - mu_i(s). All members are
/// normalized so f(0) = 0 (the offset c4 is derived, not free) and f >= 0.
/// The 1/(2 sigma^2) policy scaling is applied by the policy objective, not
/// here; sigma is carried only so the Flat/Skew constants can be derived
/// from the policy standard deviation.
///
///   L2    f(u) = u^2
///   L1    f(u) = |u|
///   Huber f(u) = u^2 for |u| <= kappa, else 2*kappa*|u| - kappa^2
///   Flat  f(u) = -log(c2 * exp(-c1 u^2) + c3) + c4
///   Skew  f(u) = -log(c2 * (exp(-c1 u^2) + 1/(c3 |u| + 1))) + c4
struct RobustLoss {
  LossKind kind = LossKind::L2;
  double kappa = 0.2;
  double c1 = 1.0, c2 = 1.0, c3 = 0.5;
  double c4 = 0.0;  // derived: value(0) == 0
  double sigma = 1.0;

  static RobustLoss l2();
  static RobustLoss l1();
  static RobustLoss huber(double kappa);
  static RobustLoss flat(double c1, double c2, double c3);
  static RobustLoss skew(double c1, double c2, double c3);

  /// Constants from the policy standard deviation: Flat (2/s^2, 1/s, 0.5),
  /// Skew (1/s^2, 1/s, 1/s).
  static RobustLoss flat_for_sigma(double sigma);
  static RobustLoss skew_for_sigma(double sigma);
};

double loss_value(const RobustLoss& loss, double u);

/// Derivative of loss_value. L1 (and the Skew kink) return 0 at u = 0.
double loss_grad(const RobustLoss& loss, double u);

/// Largest r such that the loss is convex on (-r, r). Infinite for
/// L2/L1/Huber; for Flat/Skew the smallest positive root of f''(u) = 0,
/// bisected to 1e-8.
double convex_radius(const RobustLoss& loss);

/// Shrinks the convex region by scaling c1 as training progresses
/// (progress in [0, 1]; identity at progress = 0). No-op for kinds whose
/// convex region is unbounded.
RobustLoss tighten_schedule(const RobustLoss& loss, double progress, double strength = 3.0);

}  // namespace cawr
