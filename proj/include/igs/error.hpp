#pragma once

#include <stdexcept>
#include <string>

namespace igs {

// Invalid ion count, addressing set, bounds, or other malformed input.
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Marked bitstring does not carry exactly N/2 excitations.
class InvalidMarkedState : public ConfigError {
 public:
  using ConfigError::ConfigError;
};

// Eigen-solver or degeneracy-resolution failure.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// The time integrator ran out of steps before reaching the end of the window.
class IntegrationError : public NumericalError {
 public:
  IntegrationError(const std::string& what, double tau_reached, double achieved_tolerance)
      : NumericalError(what), tau_reached_(tau_reached), achieved_tolerance_(achieved_tolerance) {}

  double tau_reached() const noexcept { return tau_reached_; }
  double achieved_tolerance() const noexcept { return achieved_tolerance_; }

 private:
  double tau_reached_;
  double achieved_tolerance_;
};

}  // namespace igs
