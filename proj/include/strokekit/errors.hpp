#pragma once

#include <stdexcept>
#include <string>

namespace strokekit {

// Malformed or inconsistent input data (files, corpora, label names).
// The CLI maps this to exit code 3.
class InputError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Invalid configuration or hyperparameter combination. CLI exit code 2.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Model file cannot be parsed or fails validation. CLI exit code 3.
class LoadError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Numeric failure during optimization (diverged loss, NaN gradient).
// Carries the epoch at which the failure was detected. CLI exit code 4.
class TrainingError : public std::runtime_error {
 public:
  TrainingError(const std::string& what, int epoch)
      : std::runtime_error(what + " (epoch " + std::to_string(epoch) + ")"),
        epoch_(epoch) {}

  int epoch() const noexcept { return epoch_; }

 private:
  int epoch_;
};

}  // namespace strokekit
