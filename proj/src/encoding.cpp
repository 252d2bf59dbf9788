#include "cawr/encoding.hpp"

#include <algorithm>
#include <cmath>

#include "cawr/errors.hpp"

namespace cawr {

TaskEncoding TaskEncoding::raw(std::size_t state_dim, std::size_t action_dim) {
  TaskEncoding e;
  e.tabular = false;
  e.state_dim = state_dim;
  e.action_dim = action_dim;
  e.codec = ActionCodec::Raw;
  return e;
}

TaskEncoding TaskEncoding::tabular_index(std::size_t n_states, std::size_t n_actions) {
  TaskEncoding e;
  e.tabular = true;
  e.n_states = n_states;
  e.n_actions = n_actions;
  e.codec = ActionCodec::RoundIndex;
  return e;
}

TaskEncoding TaskEncoding::tabular_onehot(std::size_t n_states, std::size_t n_actions) {
  TaskEncoding e = tabular_index(n_states, n_actions);
  e.codec = ActionCodec::ArgmaxOneHot;
  return e;
}

std::size_t TaskEncoding::policy_output_dim() const {
  switch (codec) {
    case ActionCodec::Raw: return action_dim;
    case ActionCodec::RoundIndex: return 1;
    case ActionCodec::ArgmaxOneHot: return n_actions;
  }
  return action_dim;
}

namespace {

std::size_t checked_index(double value, std::size_t count, const char* what) {
  const auto idx = static_cast<long long>(std::llround(value));
  if (idx < 0 || static_cast<std::size_t>(idx) >= count) {
    throw ValidationError(std::string(what) + " index out of range: " + std::to_string(value));
  }
  return static_cast<std::size_t>(idx);
}

}  // namespace

std::vector<double> TaskEncoding::encode_state(std::span<const double> state) const {
  if (!tabular) return {state.begin(), state.end()};
  if (state.size() != 1) throw ValidationError("tabular state must be a single index");
  std::vector<double> out(n_states, 0.0);
  out[checked_index(state[0], n_states, "state")] = 1.0;
  return out;
}

std::vector<double> TaskEncoding::encode_state_action(std::span<const double> state,
                                                      std::span<const double> action) const {
  if (!tabular) {
    std::vector<double> out;
    out.reserve(state.size() + action.size());
    out.insert(out.end(), state.begin(), state.end());
    out.insert(out.end(), action.begin(), action.end());
    return out;
  }
  if (state.size() != 1 || action.size() != 1) {
    throw ValidationError("tabular transitions must hold single indices");
  }
  const std::size_t s = checked_index(state[0], n_states, "state");
  const std::size_t a = checked_index(action[0], n_actions, "action");
  std::vector<double> out(n_states * n_actions, 0.0);
  out[s * n_actions + a] = 1.0;
  return out;
}

std::vector<double> TaskEncoding::policy_target(std::span<const double> action) const {
  switch (codec) {
    case ActionCodec::Raw:
      return {action.begin(), action.end()};
    case ActionCodec::RoundIndex:
      return {action[0]};
    case ActionCodec::ArgmaxOneHot: {
      std::vector<double> out(n_actions, 0.0);
      out[checked_index(action[0], n_actions, "action")] = 1.0;
      return out;
    }
  }
  return {action.begin(), action.end()};
}

std::vector<double> TaskEncoding::decode_action(std::span<const double> mean) const {
  switch (codec) {
    case ActionCodec::Raw:
      return {mean.begin(), mean.end()};
    case ActionCodec::RoundIndex: {
      const double hi = static_cast<double>(n_actions - 1);
      return {std::clamp(std::round(mean[0]), 0.0, hi)};
    }
    case ActionCodec::ArgmaxOneHot: {
      const auto best = std::max_element(mean.begin(), mean.end());
      return {static_cast<double>(best - mean.begin())};
    }
  }
  return {mean.begin(), mean.end()};
}

}  // namespace cawr
