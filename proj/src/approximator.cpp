#include "cawr/approximator.hpp"

#include <cmath>

#include "cawr/errors.hpp"
#include "json.hpp"

namespace cawr {

Mlp::Mlp(std::vector<std::size_t> layer_sizes) : layers_(std::move(layer_sizes)) {
  if (layers_.size() < 2) throw ConfigError("network needs at least input and output layers");
  std::size_t count = 0;
  for (std::size_t l = 0; l + 1 < layers_.size(); ++l) {
    if (layers_[l] == 0 || layers_[l + 1] == 0) throw ConfigError("zero-width layer");
    count += layers_[l] * layers_[l + 1] + layers_[l + 1];
  }
  params_.assign(count, 0.0);
}

Mlp Mlp::random_init(std::vector<std::size_t> layer_sizes, Rng& rng) {
  Mlp net(std::move(layer_sizes));
  std::size_t offset = 0;
  for (std::size_t l = 0; l + 1 < net.layers_.size(); ++l) {
    const std::size_t fan_in = net.layers_[l];
    const std::size_t fan_out = net.layers_[l + 1];
    const double bound = 1.0 / std::sqrt(static_cast<double>(fan_in));
    for (std::size_t i = 0; i < fan_in * fan_out; ++i) {
      net.params_[offset + i] = rng.uniform(-bound, bound);
    }
    offset += fan_in * fan_out + fan_out;  // biases stay zero
  }
  return net;
}

std::vector<double> Mlp::forward(std::span<const double> input) const {
  Tape tape;
  return forward(input, tape);
}

std::vector<double> Mlp::forward(std::span<const double> input, Tape& tape) const {
  if (input.size() != input_dim()) throw ValidationError("forward: input dimension mismatch");
  tape.param_version = version_;
  tape.activations.assign(layers_.size(), {});
  tape.activations[0].assign(input.begin(), input.end());

  std::size_t offset = 0;
  for (std::size_t l = 0; l + 1 < layers_.size(); ++l) {
    const std::size_t in = layers_[l];
    const std::size_t out = layers_[l + 1];
    const bool last = (l + 2 == layers_.size());
    const std::vector<double>& x = tape.activations[l];
    std::vector<double>& y = tape.activations[l + 1];
    y.assign(out, 0.0);
    for (std::size_t i = 0; i < out; ++i) {
      double z = params_[offset + in * out + i];  // bias
      const double* w = &params_[offset + i * in];
      for (std::size_t j = 0; j < in; ++j) z += w[j] * x[j];
      y[i] = last ? z : std::tanh(z);
    }
    offset += in * out + out;
  }
  return tape.activations.back();
}

void Mlp::backward(const Tape& tape, std::span<const double> output_grad,
                   std::vector<double>& param_grad) const {
  if (tape.param_version != version_) {
    throw ValidationError("backward: tape is stale (parameters changed since forward)");
  }
  if (tape.activations.size() != layers_.size()) throw ValidationError("backward: bad tape");
  if (output_grad.size() != output_dim()) throw ValidationError("backward: output gradient size");
  if (param_grad.size() != params_.size()) param_grad.resize(params_.size(), 0.0);

  // Propagate dLoss/dActivation from the output back to the input.
  std::vector<double> delta(output_grad.begin(), output_grad.end());

  std::size_t offset = params_.size();
  for (std::size_t l = layers_.size() - 1; l-- > 0;) {
    const std::size_t in = layers_[l];
    const std::size_t out = layers_[l + 1];
    offset -= in * out + out;
    const bool last = (l + 2 == layers_.size());
    const std::vector<double>& x = tape.activations[l];
    const std::vector<double>& y = tape.activations[l + 1];

    // dLoss/dz for this layer (tanh' = 1 - y^2 on hidden layers).
    std::vector<double> dz(out);
    for (std::size_t i = 0; i < out; ++i) {
      dz[i] = last ? delta[i] : delta[i] * (1.0 - y[i] * y[i]);
    }

    for (std::size_t i = 0; i < out; ++i) {
      double* wg = &param_grad[offset + i * in];
      for (std::size_t j = 0; j < in; ++j) wg[j] += dz[i] * x[j];
      param_grad[offset + in * out + i] += dz[i];
    }

    if (l > 0) {
      std::vector<double> prev(in, 0.0);
      for (std::size_t i = 0; i < out; ++i) {
        const double* w = &params_[offset + i * in];
        const double d = dz[i];
        for (std::size_t j = 0; j < in; ++j) prev[j] += w[j] * d;
      }
      delta = std::move(prev);
    }
  }
}

void Mlp::sgd_step(const std::vector<double>& grad, double lr) {
  if (grad.size() != params_.size()) throw ValidationError("sgd_step: gradient size mismatch");
  for (std::size_t i = 0; i < grad.size(); ++i) {
    if (!std::isfinite(grad[i])) {
      throw ValidationError("sgd_step: non-finite gradient at parameter " + std::to_string(i));
    }
  }
  for (std::size_t i = 0; i < grad.size(); ++i) params_[i] -= lr * grad[i];
  ++version_;
}

std::string Mlp::serialize() const {
  nlohmann::json j{{"format_version", 1}, {"layers", layers_}, {"params", params_}};
  return j.dump();
}

Mlp Mlp::deserialize(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("checkpoint parse error: ") + e.what());
  }
  if (j.value("format_version", 0) != 1) throw ValidationError("unsupported checkpoint version");
  Mlp net(j.at("layers").get<std::vector<std::size_t>>());
  auto params = j.at("params").get<std::vector<double>>();
  if (params.size() != net.param_count()) throw ValidationError("checkpoint parameter count mismatch");
  net.params_ = std::move(params);
  return net;
}

}  // namespace cawr
