#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace fhn {

/// Thrown when an integrated state leaves the finite-norm guard region;
/// carries the index of the last step with a finite state.
class BlowUpError : public std::runtime_error {
 public:
  BlowUpError(std::size_t last_finite_step, double t)
      : std::runtime_error("integration blew up after step " +
                           std::to_string(last_finite_step) + " (t=" + std::to_string(t) + ")"),
        last_finite_step(last_finite_step),
        time(t) {}

  std::size_t last_finite_step;
  double time;
};

/// The cubic nullcline intersection is not unique (non-positive
/// discriminant), so there is no single equilibrium to expand around.
class NotUniqueFixedPointError : public std::domain_error {
 public:
  explicit NotUniqueFixedPointError(double delta)
      : std::domain_error("fixed point is not unique (cubic discriminant = " +
                          std::to_string(delta) + " <= 0)"),
        delta(delta) {}

  double delta;
};

/// The equilibrium's eigenvalues are real, so the rotation-based
/// change of coordinates does not exist.
class UnsupportedRegimeError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Nonlinear regression could not produce a usable parameter estimate.
class FitFailureError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace fhn
