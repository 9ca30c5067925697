// mmd2d/quadrature.h
//
// Globally adaptive 15-point Gauss-Kronrod integration on finite and
// semi-infinite intervals. Every integral of the analytic engine goes
// through here.
//
// Known discontinuities (LOS ball radii and their images under exponent
// ratios) are passed as breakpoints; the initial partition always splits
// there. A semi-infinite range [a, inf) is mapped onto [0, 1) by
// x = a + scale * s / (1 - s).

#ifndef MMD2D_QUADRATURE_H_
#define MMD2D_QUADRATURE_H_

#include <functional>
#include <span>

namespace mmd2d {

struct QuadratureResult {
  double value = 0.0;
  double abs_error_estimate = 0.0;
  int evaluations = 0;
  bool converged = true;  // false: subdivision budget exhausted, value is best estimate
};

struct QuadratureOptions {
  double abs_tol = 1e-8;
  double rel_tol = 0.0;
  int max_intervals = 2000;
  double scale = 1.0;  // length scale of the semi-infinite map
};

// Inner (Laplace-transform) and outer (outage) default tolerances.
inline constexpr double kInnerTolerance = 1e-8;
inline constexpr double kOuterTolerance = 1e-6;

using Integrand = std::function<double(double)>;

/// Integrates f over [a, b]; b may be +infinity. Stops once the summed error
/// estimate is <= max(abs_tol, rel_tol * |value|).
QuadratureResult integrate(const Integrand& f, double a, double b, const QuadratureOptions& options,
                           std::span<const double> breakpoints = {});

inline QuadratureResult integrate(const Integrand& f, double a, double b, double tol,
                                  std::span<const double> breakpoints = {}) {
  QuadratureOptions options;
  options.abs_tol = tol;
  return integrate(f, a, b, options, breakpoints);
}

}  // namespace mmd2d

#endif  // MMD2D_QUADRATURE_H_
