#pragma once

#include <stdexcept>
#include <string>

namespace mmlab {

/// Invalid model, noise, solver or sweep configuration.
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Argument outside the domain of a formula (zero vectors, empty inputs).
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// The training set admits no w with y_k (w . x_k) >= 1 for every k.
class NotSeparable : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Gradient descent increased the loss under a step size that guarantees descent.
class DivergingLoss : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace mmlab
