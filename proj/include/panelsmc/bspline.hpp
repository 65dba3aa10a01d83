#ifndef PANELSMC_BSPLINE_HPP
#define PANELSMC_BSPLINE_HPP

#include <array>
#include <cmath>

namespace panelsmc {

/// Cardinal cubic B-spline on [0,4), zero elsewhere.  Integer translates
/// sum to one.
inline double cubic_bspline(double x) {
  if (x < 0.0 || x >= 4.0) return 0.0;
  if (x < 1.0) return x * x * x / 6.0;
  if (x < 2.0) {
    const double s = x - 1.0;
    return (-3.0 * s * s * s + 3.0 * s * s + 3.0 * s + 1.0) / 6.0;
  }
  if (x < 3.0) {
    const double s = x - 2.0;
    return (3.0 * s * s * s - 6.0 * s * s + 4.0) / 6.0;
  }
  const double s = 4.0 - x;
  return s * s * s / 6.0;
}

/// Periodic degree-3 B-spline basis with K=6 evenly spaced knots per unit
/// period (one year).  Nonnegative, sums to one at every t, period 1.
inline std::array<double, 6> periodic_bspline_basis(double t) {
  double frac = t - std::floor(t);
  if (frac < 0.0) frac += 1.0;  // guard against -0 rounding
  const double s = 6.0 * frac;
  std::array<double, 6> out;
  for (int k = 0; k < 6; ++k) {
    double x = s - static_cast<double>(k);
    x -= 6.0 * std::floor(x / 6.0);  // wrap into [0,6)
    out[static_cast<std::size_t>(k)] = cubic_bspline(x);
  }
  return out;
}

}  // namespace panelsmc

#endif  // PANELSMC_BSPLINE_HPP
