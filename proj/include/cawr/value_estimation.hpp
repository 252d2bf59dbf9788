#pragma once

#include <span>

#include "cawr/approximator.hpp"
#include "cawr/dataset.hpp"
#include "cawr/encoding.hpp"

namespace cawr {

/// Asymmetric squared loss |tau - 1(u < 0)| * u^2 used for expectile value
/// regression. tau must lie in (0, 1).
double expectile_loss(double u, double tau);
/// d/du of expectile_loss: 2 |tau - 1(u < 0)| * u.
double expectile_grad(double u, double tau);

/// Q and V approximators with their frozen counterparts. Per training
/// iteration, the V loss regresses against the soft-updated Q target and the
/// Q loss bootstraps from the hard per-iteration V snapshot; version stamps
/// let callers assert that no mid-update parameters leak into targets.
struct ValueNets {
  Mlp q;
  Mlp v;
  Mlp q_target;   // soft-updated copy of q
  Mlp v_snapshot; // hard copy of v taken at the top of each iteration
  double tau;
  double soft_update_coeff;
  std::uint64_t iteration = 0;

  ValueNets(Mlp q_net, Mlp v_net, double tau, double soft_update_coeff);

  /// Copies v into v_snapshot and bumps the iteration stamp.
  void begin_iteration();
  /// q_target <- (1 - c) * q_target + c * q.
  void soft_update_q_target();

  std::uint64_t v_snapshot_version() const { return v_snapshot.version(); }
};

/// One gradient step of the expectile value loss on a uniform batch.
/// Targets come from the frozen Q (q_target), never the live Q. Returns the
/// batch loss.
double update_value(ValueNets& nets, const Dataset& data, const TaskEncoding& enc,
                    std::span<const std::size_t> batch, double lr);

/// One gradient step of the TD loss (r + gamma * V_k(s') - Q(s,a))^2 against
/// the frozen V snapshot; terminal transitions use V(s') = 0. Returns the
/// batch loss.
double update_q(ValueNets& nets, const Dataset& data, const TaskEncoding& enc,
                std::span<const std::size_t> batch, double gamma, double lr);

/// Q(s,a) - V(s) from the live networks. Pure.
double advantage(const ValueNets& nets, const TaskEncoding& enc,
                 std::span<const double> state, std::span<const double> action);

}  // namespace cawr
