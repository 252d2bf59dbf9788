#include "cawr/value_estimation.hpp"

#include <cmath>

#include "cawr/errors.hpp"

namespace cawr {

double expectile_loss(double u, double tau) {
  if (!(tau > 0.0 && tau < 1.0)) throw ConfigError("expectile level must lie in (0, 1)");
  const double w = u < 0.0 ? 1.0 - tau : tau;
  return w * u * u;
}

double expectile_grad(double u, double tau) {
  if (!(tau > 0.0 && tau < 1.0)) throw ConfigError("expectile level must lie in (0, 1)");
  const double w = u < 0.0 ? 1.0 - tau : tau;
  return 2.0 * w * u;
}

ValueNets::ValueNets(Mlp q_net, Mlp v_net, double tau, double soft_update_coeff)
    : q(std::move(q_net)),
      v(std::move(v_net)),
      q_target(q),
      v_snapshot(v),
      tau(tau),
      soft_update_coeff(soft_update_coeff) {
  if (!(tau > 0.0 && tau < 1.0)) throw ConfigError("expectile level must lie in (0, 1)");
  if (!(soft_update_coeff > 0.0 && soft_update_coeff <= 1.0)) {
    throw ConfigError("soft update coefficient must lie in (0, 1]");
  }
}

void ValueNets::begin_iteration() {
  v_snapshot.mutable_params() = v.params();
  ++iteration;
}

void ValueNets::soft_update_q_target() {
  auto& target = q_target.mutable_params();
  const auto& live = q.params();
  const double c = soft_update_coeff;
  for (std::size_t i = 0; i < target.size(); ++i) {
    target[i] = (1.0 - c) * target[i] + c * live[i];
  }
}

double update_value(ValueNets& nets, const Dataset& data, const TaskEncoding& enc,
                    std::span<const std::size_t> batch, double lr) {
  if (batch.empty()) throw ValidationError("update_value: empty batch");
  const double inv_n = 1.0 / static_cast<double>(batch.size());

  std::vector<double> grad(nets.v.param_count(), 0.0);
  double loss = 0.0;
  Mlp::Tape tape;
  for (const std::size_t i : batch) {
    const Transition& t = data[i];
    const auto q_in = enc.encode_state_action(t.state, t.action);
    const double qk = nets.q_target.forward(q_in)[0];
    const auto v_in = enc.encode_state(t.state);
    const double vi = nets.v.forward(v_in, tape)[0];
    const double u = qk - vi;
    loss += expectile_loss(u, nets.tau) * inv_n;
    const double dv[1] = {-expectile_grad(u, nets.tau) * inv_n};
    nets.v.backward(tape, dv, grad);
  }
  nets.v.sgd_step(grad, lr);
  return loss;
}

double update_q(ValueNets& nets, const Dataset& data, const TaskEncoding& enc,
                std::span<const std::size_t> batch, double gamma, double lr) {
  if (batch.empty()) throw ValidationError("update_q: empty batch");
  const double inv_n = 1.0 / static_cast<double>(batch.size());

  std::vector<double> grad(nets.q.param_count(), 0.0);
  double loss = 0.0;
  Mlp::Tape tape;
  for (const std::size_t i : batch) {
    const Transition& t = data[i];
    double target = t.reward;
    if (!t.terminal) {
      const auto v_in = enc.encode_state(t.next_state);
      target += gamma * nets.v_snapshot.forward(v_in)[0];
    }
    const auto q_in = enc.encode_state_action(t.state, t.action);
    const double qi = nets.q.forward(q_in, tape)[0];
    const double u = target - qi;
    loss += u * u * inv_n;
    const double dq[1] = {-2.0 * u * inv_n};
    nets.q.backward(tape, dq, grad);
  }
  nets.q.sgd_step(grad, lr);
  return loss;
}

double advantage(const ValueNets& nets, const TaskEncoding& enc,
                 std::span<const double> state, std::span<const double> action) {
  const auto q_in = enc.encode_state_action(state, action);
  const auto v_in = enc.encode_state(state);
  return nets.q.forward(q_in)[0] - nets.v.forward(v_in)[0];
}

}  // namespace cawr
