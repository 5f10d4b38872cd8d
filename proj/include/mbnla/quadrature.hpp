#pragma once

#include <cmath>
#include <cstdint>
#include <functional>

#include "mbnla/errors.hpp"

namespace mbnla {

// Small adaptive integrators used by the analytic success-probability
// calculation and by test oracles.

namespace detail {

template <typename F>
double adaptive_simpson_step(const F& f, double a, double b, double fa,
                             double fm, double fb, double whole, double tol,
                             int depth) {
  const double m = 0.5 * (a + b);
  const double lm = 0.5 * (a + m);
  const double rm = 0.5 * (m + b);
  const double flm = f(lm);
  const double frm = f(rm);
  const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
  const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
  const double delta = left + right - whole;
  if (depth <= 0) {
    throw numeric_error("adaptive quadrature failed to converge");
  }
  if (std::abs(delta) <= 15.0 * tol) {
    return left + right + delta / 15.0;
  }
  return adaptive_simpson_step(f, a, m, fa, flm, fm, left, 0.5 * tol,
                               depth - 1) +
         adaptive_simpson_step(f, m, b, fm, frm, fb, right, 0.5 * tol,
                               depth - 1);
}

}  // namespace detail

/// Adaptive Simpson integration of f over [a, b] to absolute tolerance tol.
template <typename F>
double integrate_adaptive(const F& f, double a, double b, double tol,
                          int max_depth = 40) {
  if (a == b) return 0.0;
  const double fa = f(a);
  const double fb = f(b);
  const double m = 0.5 * (a + b);
  const double fm = f(m);
  const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
  return detail::adaptive_simpson_step(f, a, b, fa, fm, fb, whole, tol,
                                       max_depth);
}

/// Integral of a smooth periodic function over one full period [0, 2 pi),
/// using trapezoid sums with node doubling (spectrally accurate).
template <typename F>
double integrate_periodic(const F& f, double rel_tol, int min_nodes = 16,
                          int max_nodes = 1 << 16) {
  constexpr double two_pi = 6.283185307179586476925286766559;
  int n = min_nodes;
  double sum = 0.0;
  for (int i = 0; i < n; ++i) sum += f(two_pi * i / n);
  double value = sum * two_pi / n;
  while (n < max_nodes) {
    // Refine by evaluating the midpoints of the current grid.
    double extra = 0.0;
    for (int i = 0; i < n; ++i) extra += f(two_pi * (i + 0.5) / n);
    n *= 2;
    sum += extra;
    const double refined = sum * two_pi / n;
    const double scale = std::max(std::abs(refined), 1e-300);
    const bool converged = std::abs(refined - value) <= rel_tol * scale;
    value = refined;
    if (converged) return value;
  }
  throw numeric_error("periodic quadrature failed to converge");
}

}  // namespace mbnla
