#pragma once

#include <stdexcept>
#include <string>

namespace mbnla {

/// Bad user-supplied parameter (out-of-range gain, negative shot count, ...).
struct invalid_parameter_error : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

/// Covariance matrix violates the uncertainty principle or is otherwise not a
/// valid Gaussian state.
struct unphysical_state_error : std::domain_error {
  using std::domain_error::domain_error;
};

/// Numerical failure: non-convergent solve, quadrature breakdown, degenerate
/// estimate from data.
struct numeric_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Requested amplifier gain is at or beyond the bound set by the input state.
/// Carries the supremum of admissible gains located by bisection.
struct gain_exceeds_bound_error : numeric_error {
  gain_exceeds_bound_error(const std::string& msg, double supremum)
      : numeric_error(msg), gain_supremum(supremum) {}
  double gain_supremum;
};

/// Post-selection rejected every shot. Carries the acceptance-probability
/// estimate so callers can still report it.
struct empty_ensemble_error : numeric_error {
  empty_ensemble_error(const std::string& msg, double p_estimate)
      : numeric_error(msg), p_success_estimate(p_estimate) {}
  double p_success_estimate;
};

/// Filesystem or serialization failure.
struct io_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace mbnla
