// mmd2d/blockage.h
//
// LOS ball blockage model and the link-distance laws built on it:
//   - nearest LOS/NLOS BS distance (density lambda_B thinned by p_s(r)),
//   - serving BS distance under minimum path-loss association,
//   - the uniform-disk D2D link distance.
//
// The step LOS model makes psi_s(r) = int_0^r x p_s(x) dx piecewise
// quadratic, so it is evaluated in closed form.

#ifndef MMD2D_BLOCKAGE_H_
#define MMD2D_BLOCKAGE_H_

#include <array>
#include <stdexcept>
#include <vector>

#include "mmd2d/config.h"
#include "mmd2d/quadrature.h"

namespace mmd2d {

enum class LinkClass { kLos = 0, kNlos = 1 };

inline constexpr std::array<LinkClass, 2> kLinkClasses = {LinkClass::kLos, LinkClass::kNlos};

constexpr LinkClass complement(LinkClass s) {
  return s == LinkClass::kLos ? LinkClass::kNlos : LinkClass::kLos;
}

constexpr int index_of(LinkClass s) { return static_cast<int>(s); }

/// Raised when a requested distribution does not exist for the parameters,
/// e.g. the nearest-LOS law when p_L = 0.
class DegenerateModelError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// p_L(r) = p_L 1(r <= R_B);  p_N(r) = 1 - p_L(r).
double p_link(LinkClass s, double r, const LosBall& ball);

/// int_0^r x p_s(x) dx.
double psi(LinkClass s, double r, const LosBall& ball);

/// 2 r / R_B^2 on [0, R_B].
double d2d_link_pdf(double r, const LosBall& ball);

/// Path-loss exponent of a class for cellular links.
double cellular_exponent(LinkClass s, const PathLossExponents& alpha);

/// Cellular link-distance laws for one scenario. Immutable after
/// construction; the association probability is integrated once up front.
class LinkDistanceModel {
 public:
  explicit LinkDistanceModel(const NetworkParams& params, double tol = 1e-10);

  const NetworkParams& params() const { return params_; }

  /// B_s: probability that at least one class-s BS exists.
  double at_least_one_prob(LinkClass s) const { return at_least_one_[index_of(s)]; }

  /// A_s: probability the serving (minimum path-loss) BS is of class s.
  double association_prob(LinkClass s) const;

  /// Quadrature result behind A_L (A_N is its complement).
  const QuadratureResult& association_quadrature() const { return association_; }

  /// f_s(r): density of the distance to the nearest class-s BS.
  double nearest_pdf(LinkClass s, double r) const;

  /// F_s(r) = (1 - exp(-2 pi lambda_B psi_s(r))) / B_s.
  double nearest_cdf(LinkClass s, double r) const;

  /// exp(-2 pi lambda_B (psi_s(r) + psi_s'(r^{alpha_s/alpha_s'}))): probability
  /// that no BS of either class beats a class-s BS at distance r.
  double serving_void(LinkClass s, double r) const;

  /// A_s * fhat_s(r), the joint density of (serving class s, distance r).
  double serving_density(LinkClass s, double r) const;

  /// fhat_s(r) = serving_density / A_s.
  double serving_pdf(LinkClass s, double r) const;

  /// A_s * Fhat_s(r) = int_0^r serving_density(s, x) dx. Saturates at A_s
  /// once r is past the numerical support of the serving density.
  QuadratureResult serving_mass(LinkClass s, double r, double tol = kInnerTolerance) const;

  /// Radii where serving_density(s, .) is not smooth.
  std::vector<double> serving_breakpoints(LinkClass s) const;

  /// Upper end of the serving-distance support for class s: R_B for LOS,
  /// otherwise the radius where serving_void drops below `threshold`.
  double serving_support_end(LinkClass s, double threshold) const;

  /// Radius where the nearest-class void exp(-2 pi lambda_B psi_s(r)) drops
  /// below `threshold` (infinite if it never does).
  double nearest_truncation_radius(LinkClass s, double threshold) const;

 private:
  double exponent(LinkClass s) const { return cellular_exponent(s, params_.alpha); }

  NetworkParams params_;
  std::array<double, 2> at_least_one_{};
  std::array<double, 2> support_end_{};  // serving_void below 1e-18 beyond here
  QuadratureResult association_;
};

}  // namespace mmd2d

#endif  // MMD2D_BLOCKAGE_H_
