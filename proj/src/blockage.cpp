#include "mmd2d/blockage.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

namespace mmd2d {

namespace {
constexpr double kTwoPi = 2.0 * std::numbers::pi;
}

double p_link(LinkClass s, double r, const LosBall& ball) {
  const double los = r <= ball.radius ? ball.p_los : 0.0;
  return s == LinkClass::kLos ? los : 1.0 - los;
}

double psi(LinkClass s, double r, const LosBall& ball) {
  const double inside = std::min(r, ball.radius);
  const double inside_sq_half = 0.5 * inside * inside;
  if (s == LinkClass::kLos) return ball.p_los * inside_sq_half;
  const double outside = r > ball.radius ? 0.5 * (r * r - ball.radius * ball.radius) : 0.0;
  return (1.0 - ball.p_los) * inside_sq_half + outside;
}

double d2d_link_pdf(double r, const LosBall& ball) {
  if (r < 0.0 || r > ball.radius) return 0.0;
  return 2.0 * r / (ball.radius * ball.radius);
}

double cellular_exponent(LinkClass s, const PathLossExponents& alpha) {
  return s == LinkClass::kLos ? alpha.los_cellular : alpha.nlos_cellular;
}

LinkDistanceModel::LinkDistanceModel(const NetworkParams& params, double tol) : params_(params) {
  const LosBall& ball = params_.los_cellular;
  const double lambda = params_.bs_density;
  at_least_one_[index_of(LinkClass::kLos)] =
      -std::expm1(-std::numbers::pi * lambda * ball.p_los * ball.radius * ball.radius);
  // The NLOS region is unbounded, so a NLOS BS exists almost surely.
  at_least_one_[index_of(LinkClass::kNlos)] = 1.0;
  for (LinkClass s : kLinkClasses) support_end_[index_of(s)] = serving_support_end(s, 1e-18);

  if (ball.p_los == 0.0) {
    association_ = QuadratureResult{};
  } else {
    QuadratureOptions opts;
    opts.abs_tol = tol;
    const auto cuts = serving_breakpoints(LinkClass::kLos);
    association_ = integrate([this](double r) { return serving_density(LinkClass::kLos, r); }, 0.0,
                             ball.radius, opts, cuts);
    association_.value = std::clamp(association_.value, 0.0, 1.0);
  }
}

double LinkDistanceModel::association_prob(LinkClass s) const {
  return s == LinkClass::kLos ? association_.value : 1.0 - association_.value;
}

double LinkDistanceModel::nearest_pdf(LinkClass s, double r) const {
  const double b = at_least_one_prob(s);
  if (b <= 0.0) throw DegenerateModelError("no BS of the requested class can exist (B_s = 0)");
  if (r <= 0.0) return 0.0;
  const LosBall& ball = params_.los_cellular;
  const double lambda = params_.bs_density;
  return kTwoPi * lambda * r * p_link(s, r, ball) * std::exp(-kTwoPi * lambda * psi(s, r, ball)) / b;
}

double LinkDistanceModel::nearest_cdf(LinkClass s, double r) const {
  const double b = at_least_one_prob(s);
  if (b <= 0.0) throw DegenerateModelError("no BS of the requested class can exist (B_s = 0)");
  if (r <= 0.0) return 0.0;
  if (std::isinf(r)) return 1.0;
  const double v = -std::expm1(-kTwoPi * params_.bs_density * psi(s, r, params_.los_cellular));
  return std::min(1.0, v / b);
}

double LinkDistanceModel::serving_void(LinkClass s, double r) const {
  const LosBall& ball = params_.los_cellular;
  const LinkClass other = complement(s);
  const double image = std::pow(r, exponent(s) / exponent(other));
  return std::exp(-kTwoPi * params_.bs_density * (psi(s, r, ball) + psi(other, image, ball)));
}

double LinkDistanceModel::serving_density(LinkClass s, double r) const {
  if (r <= 0.0) return 0.0;
  const double p = p_link(s, r, params_.los_cellular);
  if (p == 0.0) return 0.0;
  return kTwoPi * params_.bs_density * r * p * serving_void(s, r);
}

double LinkDistanceModel::serving_pdf(LinkClass s, double r) const {
  const double a = association_prob(s);
  if (a <= 0.0) throw DegenerateModelError("serving BS can never be of the requested class (A_s = 0)");
  return serving_density(s, r) / a;
}

std::vector<double> LinkDistanceModel::serving_breakpoints(LinkClass s) const {
  const double rb = params_.los_cellular.radius;
  const double ratio = exponent(complement(s)) / exponent(s);
  return {rb, std::pow(rb, ratio)};
}

double LinkDistanceModel::serving_support_end(LinkClass s, double threshold) const {
  if (threshold >= 1.0) return 0.0;
  const double cap = s == LinkClass::kLos ? params_.los_cellular.radius : std::numeric_limits<double>::infinity();
  if (threshold <= 0.0) return cap;
  if (serving_void(s, cap) >= threshold) return cap;
  double hi = std::min(cap, std::max(1.0, params_.los_cellular.radius));
  while (serving_void(s, hi) >= threshold) hi *= 2.0;
  double lo = 0.0;
  for (int i = 0; i < 200 && hi - lo > 1e-9 * hi; ++i) {
    const double mid = 0.5 * (lo + hi);
    (serving_void(s, mid) >= threshold ? lo : hi) = mid;
  }
  return hi;
}

double LinkDistanceModel::nearest_truncation_radius(LinkClass s, double threshold) const {
  if (threshold >= 1.0) return 0.0;
  const double inf = std::numeric_limits<double>::infinity();
  if (threshold <= 0.0) return inf;
  const LosBall& ball = params_.los_cellular;
  const double target = -std::log(threshold) / (kTwoPi * params_.bs_density);  // psi value to reach
  const double rb2 = ball.radius * ball.radius;
  if (s == LinkClass::kLos) {
    if (ball.p_los * 0.5 * rb2 < target) return inf;
    return std::sqrt(2.0 * target / ball.p_los);
  }
  const double inside = (1.0 - ball.p_los) * 0.5 * rb2;
  if (inside >= target) return std::sqrt(2.0 * target / (1.0 - ball.p_los));
  return std::sqrt(2.0 * (target - inside) + rb2);
}

QuadratureResult LinkDistanceModel::serving_mass(LinkClass s, double r, double tol) const {
  if (r <= 0.0) return {};
  if (r >= support_end_[index_of(s)]) {
    QuadratureResult whole;
    whole.value = association_prob(s);
    whole.abs_error_estimate = association_.abs_error_estimate;
    return whole;
  }
  const double end = r;
  QuadratureOptions opts;
  opts.abs_tol = tol;
  const auto cuts = serving_breakpoints(s);
  return integrate([this, s](double x) { return serving_density(s, x); }, 0.0, end, opts, cuts);
}

}  // namespace mmd2d
