#include "mmd2d/interference.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <span>

#include "mmd2d/parallel.h"

namespace mmd2d {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;
constexpr double kInf = std::numeric_limits<double>::infinity();

double binomial(int n, int k) {
  double c = 1.0;
  for (int i = 1; i <= k; ++i) c = c * (n - k + i) / i;
  return c;
}

double rising_factorial(int n, int m) {
  double r = 1.0;
  for (int i = 0; i < m; ++i) r *= n + i;
  return r;
}

// m-th v-derivative of 1 - (1 + v a t^-alpha)^-N, written in x = v a t^-alpha:
//   m = 0:  1 - (1 + x)^-N
//   m >= 1: (-1)^{m+1} (N)_m a^m t^{-alpha m} (1 + x)^{-N-m}
//         = (-1)^{m+1} (N)_m v^-m x^m (1 + x)^{-N-m}
struct RadialKernel {
  int order;
  double v;
  double a;  // P G / N
  double alpha;
  int n;

  double operator()(double t) const {
    if (t <= 0.0) return 0.0;
    const double x = v * a * std::pow(t, -alpha);
    if (x == 0.0) return 0.0;
    if (order == 0) {
      if (!std::isfinite(x)) return t;
      return -std::expm1(-n * std::log1p(x)) * t;
    }
    if (!std::isfinite(x)) return 0.0;
    const double log_mag = order * std::log(x) - (n + order) * std::log1p(x) - order * std::log(v);
    const double sign = order % 2 == 1 ? 1.0 : -1.0;
    return sign * rising_factorial(n, order) * std::exp(log_mag) * t;
  }

  // Distance where x = 1.
  double knee() const { return std::pow(v * a, 1.0 / alpha); }
};

// int_lo^hi kernel(t) dt, hi may be infinite.
double radial_integral(const RadialKernel& kernel, double lo, double hi, double abs_tol, double rel_tol) {
  QuadratureOptions opts;
  opts.abs_tol = abs_tol;
  opts.rel_tol = rel_tol;
  const double knee = kernel.knee();
  const std::array<double, 1> cuts = {knee};
  if (std::isinf(hi)) opts.scale = std::max(lo, knee) > 0.0 ? std::max(lo, knee) : 1.0;
  return integrate(kernel, lo, hi, opts, cuts).value;
}

// Per-order sums of sum_G p_G sum_j int D_m(t) p_j(t) t dt, times -2 pi lambda.
std::vector<double> log_laplace_impl(double v, const InterferencePopulation& pop, int max_order, double tol) {
  std::vector<double> out(static_cast<std::size_t>(max_order) + 1, 0.0);
  if (pop.density <= 0.0 || v <= 0.0) return out;
  const LosBall& ball = pop.ball;
  const double p_los = ball.p_los;
  const bool nlos_tail_diverges = pop.alpha_nlos <= 2.0;
  for (int m = 0; m <= max_order; ++m) {
    double total = 0.0;
    for (const GainLevel& level : pop.gains.levels) {
      if (level.prob <= 0.0) continue;
      const double weight = kTwoPi * pop.density * level.prob;
      const double abs_tol = tol / (12.0 * weight);
      double sum = 0.0;
      if (p_los > 0.0) {
        const RadialKernel los{m, v, pop.tx_power * level.gain / pop.nakagami.los, pop.alpha_los, pop.nakagami.los};
        sum += p_los * radial_integral(los, 0.0, ball.radius, abs_tol / p_los, tol);
      }
      const RadialKernel nlos{m, v, pop.tx_power * level.gain / pop.nakagami.nlos, pop.alpha_nlos,
                              pop.nakagami.nlos};
      if (p_los < 1.0) sum += (1.0 - p_los) * radial_integral(nlos, 0.0, ball.radius, abs_tol / (1.0 - p_los), tol);
      if (nlos_tail_diverges) {
        sum += m % 2 == 0 ? kInf : -kInf;
      } else {
        sum += radial_integral(nlos, ball.radius, kInf, abs_tol, tol);
      }
      total += weight * sum;
    }
    out[static_cast<std::size_t>(m)] = -total;
  }
  return out;
}


// Error-free a + b = s + e.
void two_sum(double a, double b, double& s, double& e) {
  s = a + b;
  const double bb = s - a;
  e = (a - (s - bb)) + (b - bb);
}

// Compensated sum of a small set of probabilities.
double neumaier_sum(std::span<const GainLevel> levels, std::size_t skip) {
  double s = 0.0, c = 0.0;
  for (std::size_t i = 0; i < levels.size(); ++i) {
    if (i == skip) continue;
    double e;
    two_sum(s, levels[i].prob, s, e);
    c += e;
  }
  return s + c;
}

// Sectored product law with main-lobe probabilities a (BS) and b (UE). The
// smallest level takes the exact complement of the others, so the levels add
// up to 1 in floating point and not only algebraically.
GainDistribution product_law(const SectoredAntenna& bs, const SectoredAntenna& ue, double a, double b) {
  GainDistribution g;
  g.levels[0] = {bs.main_gain * ue.main_gain, a * b};
  g.levels[1] = {bs.main_gain * ue.side_gain, a * (1.0 - b)};
  g.levels[2] = {bs.side_gain * ue.main_gain, (1.0 - a) * b};
  g.levels[3] = {bs.side_gain * ue.side_gain, (1.0 - a) * (1.0 - b)};
  std::size_t smallest = 0;
  for (std::size_t i = 1; i < g.levels.size(); ++i) {
    if (g.levels[i].prob < g.levels[smallest].prob) smallest = i;
  }
  double s = 0.0, c = 0.0;
  for (std::size_t i = 0; i < g.levels.size(); ++i) {
    if (i == smallest) continue;
    double e;
    two_sum(s, g.levels[i].prob, s, e);
    c += e;
  }
  // 1 - (s + c), with the leading subtraction kept exact.
  double d, e;
  two_sum(1.0, -s, d, e);
  g.levels[smallest].prob = std::max(d + (e - c), 0.0);
  return g;
}

}  // namespace

double GainDistribution::total_probability() const { return neumaier_sum(levels, levels.size()); }

double GainDistribution::mean() const {
  double m = 0.0;
  for (const auto& l : levels) m += l.prob * l.gain;
  return m;
}

GainDistribution gain_distribution(const SectoredAntenna& bs, const SectoredAntenna& ue) {
  return product_law(bs, ue, bs.beamwidth / kTwoPi, ue.beamwidth / kTwoPi);
}

double laplace_interference(double v, const InterferencePopulation& pop, double tol) {
  if (v == 0.0 || pop.density == 0.0) return 1.0;
  return std::exp(log_laplace_impl(v, pop, 0, tol)[0]);
}

std::vector<double> log_laplace_derivatives(double v, const InterferencePopulation& pop, int max_order,
                                            double tol) {
  return log_laplace_impl(v, pop, max_order, tol);
}

std::string to_string(LinkMode mode) { return mode == LinkMode::kCellular ? "cellular" : "d2d"; }

InterferenceField interference_field(LinkMode mode, const NetworkParams& params, const DerivedDensities& dens) {
  InterferencePopulation base;
  base.gains = gain_distribution(params.antenna_bs, params.antenna_ue);
  base.nakagami = params.nakagami;
  if (mode == LinkMode::kCellular) {
    base.ball = params.los_cellular;
    base.alpha_los = params.alpha.los_cellular;
    base.alpha_nlos = params.alpha.nlos_cellular;
  } else {
    base.ball = params.los_d2d;
    base.alpha_los = params.alpha.los_d2d;
    base.alpha_nlos = params.alpha.nlos_d2d;
  }
  // Uplink cellular interferers: one per cell under congestion, density lambda_B.
  InterferencePopulation cellular = base;
  cellular.density = params.bs_density;
  cellular.tx_power = params.cellular_power;
  InterferencePopulation d2d = base;
  d2d.density = dens.d2d;
  d2d.tx_power = params.d2d_power;

  InterferenceField field;
  field.cross_scale = params.beta();
  if (mode == LinkMode::kCellular) {
    field.same_mode = cellular;
    field.cross_mode = d2d;
  } else {
    field.same_mode = d2d;
    field.cross_mode = cellular;
  }
  return field;
}

double gamma_bound_eta(int n) { return n * std::pow(std::tgamma(n + 1.0), -1.0 / n); }

double conditional_outage(double gamma, const VictimLink& link, const InterferenceField& field, double noise,
                          const AnalyticOptions& options) {
  const int order = link.nakagami;
  // SINR < gamma  <=>  h0 < base * (noise + I)
  const double base = gamma * std::pow(link.distance, link.exponent) / (link.tx_power * link.gain);
  const double beta = field.cross_scale;
  const double tol = options.inner_tol;

  if (options.tail == FadingTail::kGammaBound) {
    const double eta = gamma_bound_eta(order);
    double bracket = 1.0;  // n = 0
    for (int n = 1; n <= order; ++n) {
      const double v = n * eta * base;
      double log_phi = -v * noise + log_laplace_impl(v, field.same_mode, 0, tol)[0];
      if (beta != 0.0) log_phi += log_laplace_impl(beta * v, field.cross_mode, 0, tol)[0];
      const double sign = n % 2 == 1 ? -1.0 : 1.0;
      bracket += sign * binomial(order, n) * std::exp(log_phi);
    }
    return std::clamp(bracket, 0.0, 1.0);
  }

  // Exact normalized-gamma cdf: with s = N * base,
  //   P(h0 < x) = 1 - sum_{k<N} (-s)^k / k! * Phi^(k)(s),  Phi(u) = E[exp(-u (noise + I))].
  const double s = order * base;
  if (s == 0.0) return 0.0;
  const int kmax = order - 1;
  std::vector<double> g = log_laplace_impl(s, field.same_mode, kmax, tol);
  if (beta != 0.0) {
    const auto cross = log_laplace_impl(beta * s, field.cross_mode, kmax, tol);
    double scale = 1.0;
    for (int m = 0; m <= kmax; ++m) {
      g[static_cast<std::size_t>(m)] += scale * cross[static_cast<std::size_t>(m)];
      scale *= beta;
    }
  }
  g[0] += -s * noise;
  if (kmax >= 1) g[1] += -noise;
  const double phi0 = std::exp(g[0]);
  if (phi0 == 0.0 || !std::isfinite(g[0])) return 1.0;
  // Phi^(k+1) = sum_{j<=k} C(k, j) g_{j+1} Phi^(k-j)
  std::vector<double> phi(static_cast<std::size_t>(order), 0.0);
  phi[0] = phi0;
  for (int k = 0; k + 1 <= kmax; ++k) {
    double d = 0.0;
    for (int j = 0; j <= k; ++j) {
      d += binomial(k, j) * g[static_cast<std::size_t>(j + 1)] * phi[static_cast<std::size_t>(k - j)];
    }
    phi[static_cast<std::size_t>(k + 1)] = d;
  }
  double survival = 0.0;
  double factor = 1.0;  // (-s)^k / k!
  for (int k = 0; k <= kmax; ++k) {
    survival += factor * phi[static_cast<std::size_t>(k)];
    factor *= -s / (k + 1);
  }
  return std::clamp(1.0 - survival, 0.0, 1.0);
}

double aligned_gain(const NetworkParams& params) {
  return params.antenna_bs.main_gain * params.antenna_ue.main_gain;
}

OutageEvaluation evaluate_outage(LinkMode mode, double gamma, const NetworkParams& params,
                                 const DerivedDensities& dens, double g0, const AnalyticOptions& options) {
  if (!(gamma > 0.0)) throw std::invalid_argument("outage threshold must be positive");
  if (!(g0 > 0.0)) throw std::invalid_argument("victim gain must be positive");
  const InterferenceField field = interference_field(mode, params, dens);
  QuadratureOptions outer;
  outer.abs_tol = options.outer_tol;
  OutageEvaluation out;

  if (mode == LinkMode::kD2d) {
    VictimLink link{0.0, params.alpha.los_d2d, params.nakagami.los, params.d2d_power, g0};
    const LosBall& ball = params.los_d2d;
    auto integrand = [&](double r0) {
      if (r0 <= 0.0) return 0.0;
      VictimLink l = link;
      l.distance = r0;
      return conditional_outage(gamma, l, field, params.noise_power, options) * d2d_link_pdf(r0, ball);
    };
    const auto q = integrate(integrand, 0.0, ball.radius, outer);
    out.probability = std::clamp(q.value, 0.0, 1.0);
    out.abs_error_estimate = q.abs_error_estimate;
    out.truncation_radius = {ball.radius, 0.0};
    return out;
  }

  const LinkDistanceModel model(params);
  const double void_threshold = options.outer_tol * options.outer_tol;
  for (LinkClass s : kLinkClasses) {
    const int idx = index_of(s);
    if (model.association_prob(s) <= 0.0) continue;
    const double end = model.serving_support_end(s, void_threshold);
    out.truncation_radius[static_cast<std::size_t>(idx)] = end;
    if (end <= 0.0) continue;
    const VictimLink link{0.0, cellular_exponent(s, params.alpha),
                          s == LinkClass::kLos ? params.nakagami.los : params.nakagami.nlos,
                          params.cellular_power, g0};
    auto integrand = [&](double r0) {
      const double density = model.serving_density(s, r0);
      if (density == 0.0) return 0.0;
      VictimLink l = link;
      l.distance = r0;
      return conditional_outage(gamma, l, field, params.noise_power, options) * density;
    };
    const auto cuts = model.serving_breakpoints(s);
    const auto q = integrate(integrand, 0.0, end, outer, cuts);
    out.probability += q.value;
    out.abs_error_estimate += q.abs_error_estimate;
  }
  out.probability = std::clamp(out.probability, 0.0, 1.0);
  return out;
}

double outage_cellular(double gamma, const NetworkParams& params, const DerivedDensities& dens, double g0,
                       const AnalyticOptions& options) {
  return evaluate_outage(LinkMode::kCellular, gamma, params, dens, g0, options).probability;
}

double outage_d2d(double gamma, const NetworkParams& params, const DerivedDensities& dens, double g0,
                  const AnalyticOptions& options) {
  return evaluate_outage(LinkMode::kD2d, gamma, params, dens, g0, options).probability;
}

double steering_error_cdf(double x, const MisalignmentModel& model) {
  if (x < 0.0) return 0.0;
  if (model.sigma_be == 0.0) return 1.0;
  return std::erf(x / (std::numbers::sqrt2 * model.sigma_be));
}

GainDistribution misalignment_gain_pdf(const MisalignmentModel& model, const SectoredAntenna& bs,
                                       const SectoredAntenna& ue) {
  if (!(model.sigma_be >= 0.0)) throw ValidationError("sigma_be must be >= 0");
  const double fb = steering_error_cdf(bs.beamwidth / 2.0, model);
  const double fu = steering_error_cdf(ue.beamwidth / 2.0, model);
  return product_law(bs, ue, fb, fu);
}

double outage_with_misalignment(double gamma, const NetworkParams& params, const DerivedDensities& dens,
                                LinkMode mode, const MisalignmentModel& model, const AnalyticOptions& options) {
  const GainDistribution g0 = misalignment_gain_pdf(model, params.antenna_bs, params.antenna_ue);
  // Aligned outage plus the excess of each degraded level, so that a small
  // misalignment can never round below the aligned value.
  const double aligned = evaluate_outage(mode, gamma, params, dens, g0.levels[0].gain, options).probability;
  double excess = 0.0;
  for (std::size_t i = 1; i < g0.levels.size(); ++i) {
    const GainLevel& level = g0.levels[i];
    if (level.prob == 0.0) continue;
    const double p = evaluate_outage(mode, gamma, params, dens, level.gain, options).probability;
    excess += level.prob * std::max(p - aligned, 0.0);
  }
  return std::clamp(aligned + excess, 0.0, 1.0);
}

OutageCurve outage_curve(LinkMode mode, std::span<const double> thresholds, const NetworkParams& params,
                         const DerivedDensities& dens, const MisalignmentModel& misalignment,
                         const AnalyticOptions& options) {
  OutageCurve curve;
  curve.mode = mode;
  curve.sharing = params.sharing;
  curve.sigma_be = misalignment.sigma_be;
  curve.thresholds.assign(thresholds.begin(), thresholds.end());
  curve.probabilities.assign(thresholds.size(), 0.0);
  parallel_for(thresholds.size(), [&](std::size_t i) {
    curve.probabilities[i] = outage_with_misalignment(thresholds[i], params, dens, mode, misalignment, options);
  });
  return curve;
}

}  // namespace mmd2d
