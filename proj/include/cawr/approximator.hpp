#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "cawr/rng.hpp"

namespace cawr {

/// Fully-connected network with tanh hidden units and a linear output layer.
/// Parameters live in one flat array (per layer: row-major weights, then
/// biases) with a version stamp that increments on every update; gradient
/// tapes record the stamp so a backward pass against mutated parameters is
/// rejected. With no hidden layers this is a plain linear map, which doubles
/// as a lookup table when inputs are one-hot.
class Mlp {
 public:
  /// layer_sizes = [input, hidden..., output].
  explicit Mlp(std::vector<std::size_t> layer_sizes);

  static Mlp random_init(std::vector<std::size_t> layer_sizes, Rng& rng);

  std::size_t input_dim() const { return layers_.front(); }
  std::size_t output_dim() const { return layers_.back(); }
  std::size_t param_count() const { return params_.size(); }
  const std::vector<std::size_t>& layer_sizes() const { return layers_; }
  const std::vector<double>& params() const { return params_; }
  std::vector<double>& mutable_params() { ++version_; return params_; }
  std::uint64_t version() const { return version_; }

  /// Activation record for one forward pass.
  struct Tape {
    std::vector<std::vector<double>> activations;  // per layer, activations[0] = input
    std::uint64_t param_version = 0;
  };

  std::vector<double> forward(std::span<const double> input) const;
  std::vector<double> forward(std::span<const double> input, Tape& tape) const;

  /// Accumulates dLoss/dParams into param_grad (size param_count) given
  /// dLoss/dOutput. Throws if the tape predates a parameter update.
  void backward(const Tape& tape, std::span<const double> output_grad,
                std::vector<double>& param_grad) const;

  /// p' = p - lr * g. Throws on non-finite gradient entries.
  void sgd_step(const std::vector<double>& grad, double lr);

  std::string serialize() const;               // versioned JSON checkpoint
  static Mlp deserialize(const std::string& text);

 private:
  std::vector<std::size_t> layers_;
  std::vector<double> params_;
  std::uint64_t version_ = 0;
};

}  // namespace cawr
