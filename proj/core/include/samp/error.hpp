#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace samp {

/// Argument outside the mathematical domain of an operation (non-positive
/// precision, omega outside the invertible range, pole of a transform, ...).
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Inputs whose shapes do not agree.
class DimensionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// An iterative or quadrature routine failed to reach its tolerance.
class NumericError : public std::runtime_error {
 public:
  NumericError(const std::string& what, double last_residual)
      : std::runtime_error(what), last_residual_(last_residual) {}

  double last_residual() const noexcept { return last_residual_; }

 private:
  double last_residual_;
};

/// A matrix that should be symmetric positive definite is not; in the
/// solvers this means the Gaussian belief of the linear factor is improper.
class BeliefImproperError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A non-finite value appeared during an iteration.
class DivergedError : public std::runtime_error {
 public:
  DivergedError(const std::string& what, std::size_t iteration)
      : std::runtime_error(what), iteration_(iteration) {}

  std::size_t iteration() const noexcept { return iteration_; }

 private:
  std::size_t iteration_;
};

/// Malformed or invalid experiment configuration.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace samp
