#pragma once

#include <stdexcept>
#include <string>

namespace cawr {

/// Invalid configuration value (bad hyperparameter, malformed config file).
class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

/// Invalid runtime input (dimension mismatch, empty batch, bad index).
class ValidationError : public std::runtime_error {
 public:
  explicit ValidationError(const std::string& what) : std::runtime_error(what) {}
};

/// Non-finite loss detected during training; carries the failing iteration.
class TrainingDiverged : public std::runtime_error {
 public:
  TrainingDiverged(const std::string& what, long long iteration)
      : std::runtime_error(what), iteration(iteration) {}

  long long iteration;
};

}  // namespace cawr
