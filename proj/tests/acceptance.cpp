// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit if any
// criterion fails. Usage: acceptance <path-to-mmd2d-cli> <scratch-dir>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/special_functions/beta.hpp>

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <numbers>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "mmd2d/blockage.h"
#include "mmd2d/config.h"
#include "mmd2d/experiments.h"
#include "mmd2d/interference.h"
#include "mmd2d/mode_selection.h"
#include "mmd2d/montecarlo.h"

namespace fs = std::filesystem;
using namespace mmd2d;
using boost::math::quadrature::gauss_kronrod;

namespace {

constexpr double kPi = std::numbers::pi;
constexpr std::uint64_t kSeed = 20240601;

struct Outcome {
  bool pass = true;
  std::string detail;

  void fail(const std::string& why) {
    if (pass) detail = why;
    pass = false;
  }
};

std::string fmt(const char* f, double a, double b = 0, double c = 0, double d = 0) {
  char buf[256];
  std::snprintf(buf, sizeof buf, f, a, b, c, d);
  return buf;
}

DerivedDensities baseline_densities(const NetworkParams& p) { return derived_densities(p, p_d2d(p).p_d2d); }

// 1. Analytic vs simulated outage at the baseline, both modes, 10^4 trials.
Outcome analytic_vs_simulation() {
  Outcome o;
  ExperimentSettings s;
  s.trials = 10000;
  s.seed = kSeed;
  const auto report = run_validate(default_params(), default_gamma_grid_db(), s);
  double worst = 0.0;
  for (const auto& c : report.checks) {
    if (c.quantity == "p_d2d") continue;
    const double margin = std::abs(c.analytic - c.simulated) - c.half_width;
    worst = std::max(worst, margin);
    if (!c.pass) o.fail(c.quantity + fmt(": analytic %.4f mc %.4f hw %.4f", c.analytic, c.simulated, c.half_width));
  }
  if (o.pass) o.detail = fmt("14 points, max |diff| - half-width = %.4f (allowed 0.03)", worst);
  return o;
}

// 2. Mode selection vs 10^5-draw simulation on a 6 x 2 grid, plus its trends in T_d and p_L_c.
Outcome mode_selection_agreement() {
  Outcome o;
  const std::vector<double> biases = {0.01, 0.1, 0.3, 1.0, 3.0, 10.0};
  const std::vector<double> plos = {0.5, 1.0};
  const std::int64_t draws = 100000;
  std::vector<std::vector<double>> a(plos.size());
  double worst = 0.0;
  for (std::size_t j = 0; j < plos.size(); ++j) {
    for (double td : biases) {
      NetworkParams p = default_params();
      p.los_cellular.p_los = plos[j];
      p.d2d_bias = td;
      const double analytic = p_d2d(p).p_d2d;
      const auto mc = simulate_mode_selection(p, draws, kSeed);
      const double se = std::sqrt(analytic * (1 - analytic) / draws);
      const double z = std::abs(analytic - mc.mean) / se;
      worst = std::max(worst, z);
      if (z > 3.0) o.fail(fmt("T_d=%g p_L_c=%g: analytic %.5f mc %.5f", td, plos[j], analytic, mc.mean));
      a[j].push_back(analytic);
    }
  }
  for (std::size_t j = 0; j < plos.size(); ++j) {
    for (std::size_t i = 1; i < biases.size(); ++i) {
      if (!(a[j][i] > a[j][i - 1])) o.fail(fmt("not increasing in T_d at T_d=%g", biases[i]));
    }
  }
  for (std::size_t i = 0; i < biases.size(); ++i) {
    if (!(a[1][i] < a[0][i])) o.fail(fmt("not decreasing in p_L_c at T_d=%g", biases[i]));
  }
  if (o.pass) o.detail = fmt("12 points, max |z| = %.2f (allowed 3), monotone in T_d and p_L_c", worst);
  return o;
}

// 3. Biasing extremes.
Outcome extremes() {
  Outcome o;
  for (double pl : {1.0, 0.5, 0.0}) {
    NetworkParams p = default_params();
    p.los_cellular.p_los = pl;
    p.d2d_bias = 0.0;
    const double zero = p_d2d(p).p_d2d;
    p.d2d_bias = kInfiniteBias;
    const double one = p_d2d(p).p_d2d;
    if (std::abs(zero) > 1e-9) o.fail(fmt("T_d=0 gives %.3g at p_L_c=%g", zero, pl));
    if (std::abs(one - 1.0) > 1e-9) o.fail(fmt("T_d=inf gives %.12g at p_L_c=%g", one, pl));
  }
  if (o.pass) o.detail = "T_d=0 -> 0 and T_d=inf -> 1 at p_L_c in {1, 0.5, 0}";
  return o;
}

// --- 4. Independent Rayleigh path -------------------------------------------

// int_a^b k t / (t^alpha + k) dt via the incomplete beta function (log form for alpha = 2).
double rayleigh_radial(double k, double alpha, double a, double b) {
  if (alpha == 2.0) return 0.5 * k * std::log((b * b + k) / (a * a + k));
  const double x = 2.0 / alpha;
  auto inc = [&](double t) {
    if (t == 0.0) return 0.0;
    if (std::isinf(t)) return boost::math::beta(x, 1.0 - x);
    const double u = std::pow(t, alpha) / k;
    return boost::math::beta(x, 1.0 - x, u / (1.0 + u));
  };
  return std::pow(k, x) / alpha * (inc(b) - inc(a));
}

struct RayleighPopulation {
  double density, power, p_los, radius, alpha_los, alpha_nlos;
  std::array<std::pair<double, double>, 4> gains;  // (gain, prob)
};

double rayleigh_log_laplace(double v, const RayleighPopulation& pop) {
  if (v == 0.0 || pop.density == 0.0) return 0.0;
  double sum = 0.0;
  for (const auto& [g, pg] : pop.gains) {
    const double k = v * pop.power * g;
    sum += pg * (pop.p_los * rayleigh_radial(k, pop.alpha_los, 0.0, pop.radius) +
                 (1 - pop.p_los) * rayleigh_radial(k, pop.alpha_nlos, 0.0, pop.radius) +
                 rayleigh_radial(k, pop.alpha_nlos, pop.radius, INFINITY));
  }
  return -2 * kPi * pop.density * sum;
}

// Boost Gauss-Kronrod over consecutive cuts, plus [last cut, inf) when `tail`
// is set, mapped as r = c + scale * s / (1 - s).
double boost_piecewise(const std::function<double(double)>& f, std::vector<double> cuts, bool tail,
                       double scale = 100.0) {
  constexpr double kTol = 1e-12;
  std::sort(cuts.begin(), cuts.end());
  double total = 0.0;
  for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
    if (cuts[i + 1] > cuts[i]) total += gauss_kronrod<double, 61>::integrate(f, cuts[i], cuts[i + 1], 15, kTol);
  }
  if (tail) {
    const double c = cuts.back();
    auto mapped = [&](double s) {
      const double one_minus = 1.0 - s;
      if (one_minus <= 0.0) return 0.0;
      return f(c + scale * s / one_minus) * scale / (one_minus * one_minus);
    };
    total += gauss_kronrod<double, 61>::integrate(mapped, 0.0, 1.0, 15, kTol);
  }
  return total;
}

double rayleigh_outage_oracle(LinkMode mode, double gamma, const NetworkParams& p, const DerivedDensities& dens) {
  const bool cellular = mode == LinkMode::kCellular;
  const double pb = p.antenna_bs.beamwidth / (2 * kPi), pu = p.antenna_ue.beamwidth / (2 * kPi);
  const double M = p.antenna_bs.main_gain, m = p.antenna_bs.side_gain;
  const double Mu = p.antenna_ue.main_gain, mu = p.antenna_ue.side_gain;
  const std::array<std::pair<double, double>, 4> gains = {
      std::pair{M * Mu, pb * pu}, {M * mu, pb * (1 - pu)}, {m * Mu, (1 - pb) * pu}, {m * mu, (1 - pb) * (1 - pu)}};
  const LosBall ball = cellular ? p.los_cellular : p.los_d2d;
  const double al = cellular ? p.alpha.los_cellular : p.alpha.los_d2d;
  const double an = cellular ? p.alpha.nlos_cellular : p.alpha.nlos_d2d;
  const RayleighPopulation cell{p.bs_density, p.cellular_power, ball.p_los, ball.radius, al, an, gains};
  const RayleighPopulation d2d{dens.d2d, p.d2d_power, ball.p_los, ball.radius, al, an, gains};
  const RayleighPopulation& same = cellular ? cell : d2d;
  const RayleighPopulation& cross = cellular ? d2d : cell;
  const double beta = p.beta();
  const double g0 = M * Mu;
  const double power = cellular ? p.cellular_power : p.d2d_power;

  auto conditional = [&](double r, double alpha) {
    const double v = gamma * std::pow(r, alpha) / (power * g0);
    double log_phi = -v * p.noise_power + rayleigh_log_laplace(v, same);
    if (beta != 0.0) log_phi += rayleigh_log_laplace(beta * v, cross);
    return 1.0 - std::exp(log_phi);
  };

  if (!cellular) {
    const double rd = p.los_d2d.radius;
    return boost_piecewise([&](double r) { return conditional(r, al) * 2 * r / (rd * rd); }, {0.0, rd}, false);
  }
  // Serving-distance densities written out from the LOS ball model.
  const double lam = p.bs_density, rb = p.los_cellular.radius, pl = p.los_cellular.p_los;
  auto psi_l = [&](double r) { return pl * std::pow(std::min(r, rb), 2) / 2; };
  auto psi_n = [&](double r) {
    return (1 - pl) * std::pow(std::min(r, rb), 2) / 2 + (r > rb ? (r * r - rb * rb) / 2 : 0.0);
  };
  const double acl = p.alpha.los_cellular, acn = p.alpha.nlos_cellular;
  auto los_density = [&](double r) {
    if (r <= 0 || r > rb) return 0.0;
    return 2 * kPi * lam * r * pl * std::exp(-2 * kPi * lam * (psi_l(r) + psi_n(std::pow(r, acl / acn))));
  };
  auto nlos_density = [&](double r) {
    if (r <= 0) return 0.0;
    const double pn = r <= rb ? 1 - pl : 1.0;
    return 2 * kPi * lam * r * pn * std::exp(-2 * kPi * lam * (psi_n(r) + psi_l(std::pow(r, acn / acl))));
  };
  // NLOS density kinks where the equal-path-loss LOS distance crosses the ball edge.
  const double kink = std::pow(rb, acl / acn);
  double total = 0.0;
  if (pl > 0) total += boost_piecewise([&](double r) { return conditional(r, acl) * los_density(r); }, {0.0, rb}, false);
  total += boost_piecewise([&](double r) { return conditional(r, acn) * nlos_density(r); }, {0.0, kink, rb}, true,
                           1.0 / std::sqrt(kPi * lam));
  return total;
}

Outcome rayleigh_collapse() {
  Outcome o;
  std::mt19937_64 rng(kSeed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  AnalyticOptions tight;
  tight.inner_tol = 1e-13;
  tight.outer_tol = 1e-12;
  double worst = 0.0;
  for (int i = 0; i < 20; ++i) {
    NetworkParams p = default_params();
    p.nakagami = {1, 1};
    p.bs_density = 1e-5 * std::pow(10.0, u(rng) - 0.5);
    p.ue_density = 1e-3 * std::pow(10.0, u(rng) - 0.5);
    p.los_cellular = {0.3 + 0.7 * u(rng), 50.0 + 150.0 * u(rng)};
    p.los_d2d.radius = 20.0 + 60.0 * u(rng);
    p.alpha.los_cellular = i % 2 ? 2.0 : 2.0 + 0.6 * u(rng);
    p.alpha.los_d2d = i % 3 ? 2.0 : 2.0 + 0.6 * u(rng);
    p.alpha.nlos_cellular = 3.0 + u(rng);
    p.alpha.nlos_d2d = 3.0 + u(rng);
    p.d2d_bias = std::pow(10.0, 2 * u(rng) - 1);
    p.sharing = i % 4 == 3 ? SpectrumSharing::kOverlay : SpectrumSharing::kUnderlay;
    const double gamma = db_to_linear(-10 + 30 * u(rng));
    const LinkMode mode = i % 2 ? LinkMode::kCellular : LinkMode::kD2d;
    const auto dens = derived_densities(p, p_d2d(p, 1e-10).p_d2d);
    const double lib = evaluate_outage(mode, gamma, p, dens, aligned_gain(p), tight).probability;
    const double oracle = rayleigh_outage_oracle(mode, gamma, p, dens);
    const double err = std::abs(lib - oracle);
    worst = std::max(worst, err);
    if (err > 1e-9) {
      o.fail(to_string(mode) + fmt(" point %g: library %.12f oracle %.12f", i, lib, oracle));
    }
  }
  if (o.pass) o.detail = fmt("20 random points, max |diff| = %.2e (allowed 1e-9)", worst);
  return o;
}

// 5. Overlay vs underlay.
Outcome sharing_trends() {
  Outcome o;
  ExperimentSettings s;
  s.trials = 10000;
  s.seed = kSeed;
  const auto g = default_gamma_grid_db();
  const std::vector<double> betas = {0, 1};
  const Table t = run_fig3(default_params(), betas, g, s);
  const auto cell = t.column_values("cellular_analytic");
  const auto d2d = t.column_values("d2d_analytic");
  const auto hw = t.column_values("d2d_mc_hw");
  const std::size_t n = g.size();
  double gap = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    if (!(cell[i] <= cell[n + i])) o.fail(fmt("cellular overlay above underlay at %g dB", g[i]));
    const double d = std::abs(d2d[i] - d2d[n + i]);
    gap = std::max(gap, d);
    if (!(d < 0.01 + std::max(hw[i], hw[n + i]))) o.fail(fmt("D2D curves differ by %.4f at %g dB", d, g[i]));
  }
  if (o.pass) o.detail = fmt("cellular overlay <= underlay on 7 points; max D2D gap %.4f", gap);
  return o;
}

// 6. Antenna gain and beamwidth.
Outcome antenna_trends() {
  Outcome o;
  const NetworkParams base = default_params();
  const auto g = default_gamma_grid_db();
  auto curve = [&](const AntennaVariant& v, LinkMode mode) {
    const NetworkParams p = with_antenna(base, v);
    std::vector<double> lin;
    for (double d : g) lin.push_back(db_to_linear(d));
    return outage_curve(mode, lin, p, baseline_densities(p)).probabilities;
  };
  for (LinkMode mode : {LinkMode::kCellular, LinkMode::kD2d}) {
    const auto ref = curve({20, 30}, mode);
    const auto gain = curve({25, 30}, mode);
    const auto wide = curve({20, 90}, mode);
    for (std::size_t i = 0; i < g.size(); ++i) {
      if (!(gain[i] < ref[i])) o.fail(to_string(mode) + fmt(": 25 dB not below 20 dB at %g dB", g[i]));
      if (!(wide[i] > ref[i])) o.fail(to_string(mode) + fmt(": 90 deg not above 30 deg at %g dB", g[i]));
    }
  }
  if (o.pass) o.detail = "M 20->25 dB lowers and theta 30->90 deg raises outage at all 7 points, both modes";
  return o;
}

// 7. Beam-steering error.
Outcome misalignment_trend() {
  Outcome o;
  const NetworkParams p = default_params();
  const auto dens = baseline_densities(p);
  const auto g = default_gamma_grid_db();
  std::vector<double> lin;
  for (double d : g) lin.push_back(db_to_linear(d));
  for (LinkMode mode : {LinkMode::kCellular, LinkMode::kD2d}) {
    std::vector<double> prev;
    for (double deg : {0.0, 2.0, 5.0, 10.0}) {
      const auto c = outage_curve(mode, lin, p, dens, {degrees_to_radians(deg)}).probabilities;
      for (std::size_t i = 0; i < g.size(); ++i) {
        if (deg == 0.0) {
          const double perfect = evaluate_outage(mode, lin[i], p, dens, aligned_gain(p)).probability;
          if (std::abs(c[i] - perfect) > 1e-12) o.fail(to_string(mode) + fmt(": sigma=0 off by %.3g", c[i] - perfect));
        } else if (!(c[i] >= prev[i])) {
          o.fail(to_string(mode) + fmt(": decreases at sigma=%g deg, %g dB", deg, g[i]));
        }
      }
      prev = c;
    }
  }
  if (o.pass) o.detail = "nondecreasing over sigma in {0,2,5,10} deg, both modes; sigma=0 equals aligned";
  return o;
}

// 8. Distribution sanity.
Outcome distribution_sanity() {
  Outcome o;
  double worst_pdf = 0.0, worst_assoc = 0.0;
  for (double pl : {1.0, 0.5, 0.2}) {
    NetworkParams p = default_params();
    p.los_cellular.p_los = pl;
    const LinkDistanceModel m(p);
    const double rb = p.los_cellular.radius;
    const double image = std::pow(rb, p.alpha.nlos_cellular / p.alpha.los_cellular);
    for (LinkClass s : kLinkClasses) {
      const bool los = s == LinkClass::kLos;
      const double nearest = boost_piecewise([&](double r) { return m.nearest_pdf(s, r); }, {0.0, rb}, !los);
      const double serving = boost_piecewise([&](double r) { return m.serving_pdf(s, r); },
                                             los ? std::vector{0.0, rb} : std::vector{0.0, rb, image}, !los);
      worst_pdf = std::max({worst_pdf, std::abs(nearest - 1), std::abs(serving - 1)});
    }
    const double a_l = boost_piecewise([&](double r) { return m.serving_density(LinkClass::kLos, r); }, {0.0, rb}, false);
    const double a_n =
        boost_piecewise([&](double r) { return m.serving_density(LinkClass::kNlos, r); }, {0.0, rb, image}, true);
    worst_assoc = std::max({worst_assoc, std::abs(a_l + a_n - 1),
                            std::abs(m.association_prob(LinkClass::kLos) - a_l),
                            std::abs(m.association_prob(LinkClass::kNlos) - a_n)});
  }
  const LosBall d2d_ball = default_params().los_d2d;
  worst_pdf = std::max(worst_pdf, std::abs(boost_piecewise([&](double r) { return d2d_link_pdf(r, d2d_ball); },
                                                           {0.0, d2d_ball.radius}, false) - 1));
  if (worst_pdf > 1e-6) o.fail(fmt("pdf mass off by %.3g", worst_pdf));
  if (worst_assoc > 1e-9) o.fail(fmt("association probabilities off by %.3g", worst_assoc));

  for (double deg : {30.0, 90.0, 10.0, 45.0}) {
    const NetworkParams p = with_antenna(default_params(), {20.0, deg});
    if (gain_distribution(p.antenna_bs, p.antenna_ue).total_probability() != 1.0) {
      o.fail(fmt("gain probabilities do not sum to 1 at theta=%g", deg));
    }
  }
  const NetworkParams p = default_params();
  const auto dens = baseline_densities(p);
  for (LinkMode mode : {LinkMode::kCellular, LinkMode::kD2d}) {
    const auto field = interference_field(mode, p, dens);
    if (laplace_interference(0.0, field.same_mode) != 1.0 || laplace_interference(0.0, field.cross_mode) != 1.0) {
      o.fail("Laplace transform at v=0 is not exactly 1");
    }
  }
  if (o.pass) o.detail = fmt("max pdf mass error %.1e, max association error %.1e", worst_pdf, worst_assoc);
  return o;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// 9. Two executions of the CLI validate command.
Outcome determinism(const std::string& cli, const fs::path& scratch) {
  Outcome o;
  std::vector<fs::path> dirs = {scratch / "run_a", scratch / "run_b", scratch / "run_c"};
  const std::vector<std::string> extra = {"", "", " --threads 3"};
  for (std::size_t i = 0; i < dirs.size(); ++i) {
    fs::remove_all(dirs[i]);
    const std::string cmd = "\"" + cli + "\" validate --trials 10000 --seed 7 --out \"" + dirs[i].string() + "\"" +
                            extra[i] + " > \"" + (scratch / ("log_" + std::to_string(i) + ".txt")).string() + "\" 2>&1";
    const int rc = std::system(cmd.c_str());
    if (rc != 0) o.fail("validate exited with status " + std::to_string(rc));
  }
  for (const char* name : {"validate_pd2d.csv", "validate_outage.csv", "validate_report.txt"}) {
    const std::string a = slurp(dirs[0] / name);
    if (a.empty()) o.fail(std::string(name) + " missing");
    for (std::size_t i = 1; i < dirs.size(); ++i) {
      if (slurp(dirs[i] / name) != a) o.fail(std::string(name) + " differs between runs");
    }
  }
  if (o.pass) o.detail = "validate CSVs byte-identical across 3 executions (1 and 3 threads)";
  return o;
}

}  // namespace

int main(int argc, char** argv) {
  if (argc < 3) {
    std::fprintf(stderr, "usage: %s <mmd2d-cli> <scratch-dir>\n", argv[0]);
    return 2;
  }
  const std::string cli = argv[1];
  const fs::path scratch = argv[2];
  fs::create_directories(scratch);

  struct Criterion {
    const char* name;
    std::function<Outcome()> run;
  };
  const std::vector<Criterion> criteria = {
      {"analytic-MC outage agreement", analytic_vs_simulation},
      {"mode-selection agreement and trends", mode_selection_agreement},
      {"biasing extremes", extremes},
      {"Rayleigh collapse", rayleigh_collapse},
      {"spectrum-sharing trends", sharing_trends},
      {"antenna trends", antenna_trends},
      {"misalignment trend", misalignment_trend},
      {"distribution sanity", distribution_sanity},
      {"determinism", [&] { return determinism(cli, scratch); }},
  };
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Outcome o;
    try {
      o = criteria[i].run();
    } catch (const std::exception& e) {
      o.fail(std::string("exception: ") + e.what());
    }
    std::printf("%s  %zu. %-38s %s\n", o.pass ? "PASS" : "FAIL", i + 1, criteria[i].name, o.detail.c_str());
    std::fflush(stdout);
    if (!o.pass) ++failed;
  }
  std::printf("%d of %zu acceptance criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
  return failed == 0 ? 0 : 1;
}
