#pragma once

#include <span>
#include <vector>

namespace cawr {

/// How continuous policy outputs map back to dataset-format actions.
enum class ActionCodec {
  Raw,           // pass through (continuous tasks)
  RoundIndex,    // scalar output rounded and clamped to an action index
  ArgmaxOneHot,  // one-hot output decoded by argmax
};

/// Feature mapping between dataset records and approximator inputs/targets.
/// Tabular tasks one-hot encode states (and state-action pairs for Q), so a
/// linear network is an exact table; continuous tasks pass vectors through.
struct TaskEncoding {
  bool tabular = false;
  std::size_t n_states = 0, n_actions = 0;  // tabular only
  std::size_t state_dim = 1, action_dim = 1;
  ActionCodec codec = ActionCodec::Raw;

  static TaskEncoding raw(std::size_t state_dim, std::size_t action_dim);
  static TaskEncoding tabular_index(std::size_t n_states, std::size_t n_actions);
  static TaskEncoding tabular_onehot(std::size_t n_states, std::size_t n_actions);

  std::size_t v_input_dim() const { return tabular ? n_states : state_dim; }
  std::size_t q_input_dim() const { return tabular ? n_states * n_actions : state_dim + action_dim; }
  std::size_t policy_input_dim() const { return v_input_dim(); }
  std::size_t policy_output_dim() const;

  std::vector<double> encode_state(std::span<const double> state) const;
  std::vector<double> encode_state_action(std::span<const double> state,
                                          std::span<const double> action) const;
  /// Regression target the policy mean is fit against.
  std::vector<double> policy_target(std::span<const double> action) const;
  /// Dataset-format action for a policy mean output.
  std::vector<double> decode_action(std::span<const double> mean) const;
};

}  // namespace cawr
