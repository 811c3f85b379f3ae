#pragma once

#include <stdexcept>
#include <string>

namespace frmom {

/// Operand shapes that do not line up: matrix/vector sizes, parameter counts.
class DimensionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// An argument outside the operation's domain (bad step size, d < 3, empty batch, ...).
class DomainError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Numerical breakdown: non-finite values, rank deficiency, failed line search.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed or inconsistent experiment configuration.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace frmom
