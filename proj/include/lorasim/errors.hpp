#pragma once

#include <stdexcept>

namespace lorasim {

/// A PHY/MAC parameter outside its valid domain.
class ParameterError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A simulation invariant was breached; the run cannot be trusted.
class InvariantError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

/// Malformed or inconsistent experiment configuration.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace lorasim
