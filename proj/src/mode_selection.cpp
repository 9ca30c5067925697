#include "mmd2d/mode_selection.h"

#include <algorithm>
#include <cmath>
#include <vector>

namespace mmd2d {

double cellular_cdf(LinkClass s, double r, const LinkDistanceModel& model) {
  return model.nearest_cdf(s, r);
}

double mode_switch_distance(LinkClass s, double r_d, const NetworkParams& params) {
  const double alpha_s = cellular_exponent(s, params.alpha);
  const double bias = params.d2d_bias;
  if (std::isinf(bias)) return 0.0;
  if (bias == 0.0) return std::numeric_limits<double>::infinity();
  return std::pow(r_d, params.alpha.los_d2d / alpha_s) * std::pow(bias, -1.0 / alpha_s);
}

ModeSelectionResult p_d2d(const NetworkParams& params, double tol) {
  return p_d2d(LinkDistanceModel(params), tol);
}

ModeSelectionResult p_d2d(const LinkDistanceModel& model, double tol) {
  const NetworkParams& params = model.params();
  ModeSelectionResult out;
  if (std::isinf(params.d2d_bias)) {
    out.p_d2d = 1.0;
    return out;
  }
  if (params.d2d_bias == 0.0) {
    // Every BS beats a D2D link with zero bias.
    out.per_class_terms = {model.association_prob(LinkClass::kLos), model.association_prob(LinkClass::kNlos)};
    out.quadrature_error = model.association_quadrature().abs_error_estimate;
    out.p_d2d = 0.0;
    return out;
  }

  const double rd_max = params.los_d2d.radius;
  const double inner_tol = 0.1 * tol;
  for (LinkClass s : kLinkClasses) {
    if (model.association_prob(s) <= 0.0) continue;
    // Map the serving-density kinks back to D2D distances.
    const double alpha_s = cellular_exponent(s, params.alpha);
    const double to_rd = alpha_s / params.alpha.los_d2d;
    std::vector<double> cuts;
    for (double x : model.serving_breakpoints(s)) {
      cuts.push_back(std::pow(x * std::pow(params.d2d_bias, 1.0 / alpha_s), to_rd));
    }
    double inner_error = 0.0;
    auto integrand = [&](double rd) {
      const auto mass = model.serving_mass(s, mode_switch_distance(s, rd, params), inner_tol);
      inner_error = std::max(inner_error, mass.abs_error_estimate);
      return mass.value * d2d_link_pdf(rd, params.los_d2d);
    };
    QuadratureOptions opts;
    opts.abs_tol = tol;
    const auto q = integrate(integrand, 0.0, rd_max, opts, cuts);
    out.per_class_terms[index_of(s)] = q.value;
    out.quadrature_error += q.abs_error_estimate + inner_error;
  }
  const double cellular = out.per_class_terms[0] + out.per_class_terms[1];
  out.p_d2d = std::clamp(1.0 - cellular, 0.0, 1.0);
  return out;
}

}  // namespace mmd2d
