#include <algorithm>
#include <set>
#include <cmath>
#include <numbers>

#include "doctest.h"
#include "mmd2d/mode_selection.h"
#include "mmd2d/montecarlo.h"

using namespace mmd2d;

namespace {

constexpr double kPi = std::numbers::pi;

DerivedDensities baseline_densities(const NetworkParams& p) { return derived_densities(p, p_d2d(p).p_d2d); }

// Border-corrected Ripley K estimate at distance r on the disk of `radius`.
double ripley_k(const std::vector<Point>& pts, double radius, double r) {
  const double area = kPi * radius * radius;
  // (n - 1) / A: given n points, an interior point has n - 1 potential neighbours.
  const double intensity = (static_cast<double>(pts.size()) - 1.0) / area;
  long pairs = 0;
  long centres = 0;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    if (radius - std::hypot(pts[i].x, pts[i].y) < r) continue;
    ++centres;
    for (std::size_t j = 0; j < pts.size(); ++j) {
      if (i != j && std::hypot(pts[i].x - pts[j].x, pts[i].y - pts[j].y) <= r) ++pairs;
    }
  }
  return centres == 0 ? 0.0 : static_cast<double>(pairs) / centres / intensity;
}

}  // namespace

TEST_CASE("PPP counts follow the Poisson mean") {
  Rng rng = make_rng(1, 2, 3);
  CHECK(sample_ppp(0.0, 100.0, rng).empty());
  const int draws = 10000;
  const double expected = 1e-5 * kPi * 2000.0 * 2000.0;  // 125.66
  double total = 0.0;
  for (int i = 0; i < draws; ++i) {
    const auto pts = sample_ppp(1e-5, 2000.0, rng);
    for (const Point& p : pts) CHECK_MESSAGE(std::hypot(p.x, p.y) <= 2000.0, "point outside disk");
    total += pts.size();
  }
  const double mean = total / draws;
  CHECK(std::abs(mean - expected) <= 3.0 * std::sqrt(expected / draws));
}

TEST_CASE("PPP points are completely spatially random (Ripley K)") {
  // Mean of K(r) / (pi r^2) over independent patterns, within three standard errors of 1.
  Rng rng = make_rng(9, 0, 0);
  for (double r : {0.1, 0.2}) {
    const int patterns = 2000;
    double sum = 0.0, sum2 = 0.0;
    for (int i = 0; i < patterns; ++i) {
      const double ratio = ripley_k(sample_ppp(400.0 / kPi, 1.0, rng), 1.0, r) / (kPi * r * r);
      sum += ratio;
      sum2 += ratio * ratio;
    }
    const double mean = sum / patterns;
    const double sd = std::sqrt((sum2 / patterns - mean * mean) / (patterns - 1) * patterns);
    CAPTURE(r);
    CHECK(std::abs(mean - 1.0) / (sd / std::sqrt(patterns)) < 3.0);
  }
}

TEST_CASE("Bernoulli estimate") {
  const auto e = bernoulli_estimate(250, 1000, 42);
  CHECK(e.mean == 0.25);
  CHECK(e.half_width_95 == doctest::Approx(1.96 * std::sqrt(0.25 * 0.75 / 1000)));
  CHECK(e.trials == 1000);
  CHECK(e.seed == 42);
  CHECK(bernoulli_estimate(0, 10, 0).half_width_95 == 0.0);
}

TEST_CASE("realizations respect the model invariants") {
  const NetworkParams p = default_params();
  const auto dens = baseline_densities(p);
  Rng rng = make_rng(4, 0, 0);
  const std::set<double> levels = {1e4, 10.0, 0.01};
  for (int i = 0; i < 200; ++i) {
    for (LinkMode mode : {LinkMode::kCellular, LinkMode::kD2d}) {
      const auto w = sample_realization(mode, p, dens, std::nullopt, default_disk_radius(p), rng);
      CHECK(w.victim_fading > 0.0);
      CHECK(w.victim_gain == doctest::Approx(1e4));
      if (mode == LinkMode::kD2d) {
        CHECK(w.victim_class == LinkClass::kLos);
        CHECK(w.victim_distance <= 50.0);
        CHECK(w.bs_points.empty());
      } else if (w.victim_class == LinkClass::kLos) {
        CHECK(w.victim_distance <= 100.0);
      }
      CHECK(w.interferers.size() == w.cellular_interferer_points.size() + w.d2d_interferer_points.size());
      for (const auto& d : w.interferers) {
        CHECK(d.fading > 0.0);
        CHECK(std::any_of(levels.begin(), levels.end(), [&](double g) { return std::abs(d.gain - g) < 1e-9 * g; }));
        const LosBall& ball = mode == LinkMode::kCellular ? p.los_cellular : p.los_d2d;
        if (d.distance > ball.radius) CHECK(d.link_class == LinkClass::kNlos);
      }
    }
  }
}

TEST_CASE("overlay removes cross-mode interferers") {
  NetworkParams p = default_params();
  p.sharing = SpectrumSharing::kOverlay;
  const auto dens = baseline_densities(p);
  Rng rng = make_rng(5, 0, 0);
  for (int i = 0; i < 20; ++i) {
    CHECK(sample_realization(LinkMode::kCellular, p, dens, std::nullopt, 1000.0, rng).d2d_interferer_points.empty());
    CHECK(sample_realization(LinkMode::kD2d, p, dens, std::nullopt, 1000.0, rng).cellular_interferer_points.empty());
  }
}

TEST_CASE("same seed, same estimate, any thread count") {
  const NetworkParams p = default_params();
  const auto dens = baseline_densities(p);
  SimulationOptions one;
  one.threads = 1;
  SimulationOptions four;
  four.threads = 4;
  const std::vector<double> g = {0.1, 1.0, 10.0};
  const auto a = simulate_outage_curve(g, p, dens, LinkMode::kCellular, std::nullopt, 3000, 17, one);
  const auto b = simulate_outage_curve(g, p, dens, LinkMode::kCellular, std::nullopt, 3000, 17, four);
  for (std::size_t i = 0; i < g.size(); ++i) {
    CHECK(a[i].mean == b[i].mean);
    CHECK(a[i].half_width_95 == b[i].half_width_95);
  }
  CHECK(simulate_mode_selection(p, 5000, 3, one).mean == simulate_mode_selection(p, 5000, 3, four).mean);
  // Curve thresholds share realizations, so the simulated curve is monotone.
  CHECK(a[0].mean <= a[1].mean);
  CHECK(a[1].mean <= a[2].mean);
  CHECK(simulate_outage(1.0, p, dens, LinkMode::kCellular, std::nullopt, 3000, 17, one).mean == a[1].mean);
  CHECK(simulate_outage(1.0, p, dens, LinkMode::kCellular, std::nullopt, 3000, 18, one).mean != a[1].mean);
}

TEST_CASE("noise-dominated links always fail") {
  NetworkParams p = default_params();
  p.noise_power = 1e3;
  const auto dens = baseline_densities(default_params());
  for (LinkMode mode : {LinkMode::kCellular, LinkMode::kD2d}) {
    CHECK(simulate_outage(1.0, p, dens, mode, std::nullopt, 500, 1).mean == 1.0);
  }
}

TEST_CASE("mode selection extremes") {
  NetworkParams p = default_params();
  p.d2d_bias = kInfiniteBias;
  CHECK(simulate_mode_selection(p, 2000, 1).mean == 1.0);
  p.d2d_bias = 0.0;
  CHECK(simulate_mode_selection(p, 2000, 1).mean == 0.0);
  CHECK_THROWS_AS(simulate_mode_selection(p, 0, 1), std::invalid_argument);
  CHECK_THROWS_AS(simulate_outage(1.0, p, baseline_densities(default_params()), LinkMode::kD2d, std::nullopt, 0, 1),
                  std::invalid_argument);
}

TEST_CASE("simulation disk is large enough") {
  const NetworkParams p = default_params();
  const auto dens = baseline_densities(p);
  CHECK(default_disk_radius(p) == doctest::Approx(std::max(500.0, 3.0 / std::sqrt(kPi * 1e-5))));
  for (LinkMode mode : {LinkMode::kCellular, LinkMode::kD2d}) {
    SimulationOptions wide;
    wide.disk_radius = 2 * default_disk_radius(p);
    const auto a = simulate_outage(1.0, p, dens, mode, std::nullopt, 20000, 8);
    const auto b = simulate_outage(1.0, p, dens, mode, std::nullopt, 20000, 8, wide);
    CAPTURE(to_string(mode));
    // Three standard errors of the difference of the two estimates.
    const double se_diff = std::hypot(a.half_width_95, b.half_width_95) / 1.96;
    CHECK(std::abs(a.mean - b.mean) < 3.0 * se_diff);
  }
}

TEST_CASE("half-width shrinks as one over root n") {
  const NetworkParams p = default_params();
  const auto dens = baseline_densities(p);
  const auto small = simulate_outage(1.0, p, dens, LinkMode::kCellular, std::nullopt, 2500, 21);
  const auto large = simulate_outage(1.0, p, dens, LinkMode::kCellular, std::nullopt, 10000, 22);
  const double ratio = small.half_width_95 / large.half_width_95;
  CHECK(ratio > 2.0 * 0.8);
  CHECK(ratio < 2.0 * 1.2);
}

TEST_CASE("simulated outage agrees with the analytic engine at 0 dB") {
  const NetworkParams p = default_params();
  const auto dens = baseline_densities(p);
  for (LinkMode mode : {LinkMode::kCellular, LinkMode::kD2d}) {
    const auto mc = simulate_outage(1.0, p, dens, mode, std::nullopt, 10000, 31);
    const double analytic = evaluate_outage(mode, 1.0, p, dens, aligned_gain(p)).probability;
    CAPTURE(to_string(mode));
    CHECK(std::abs(mc.mean - analytic) <= mc.half_width_95 + 0.02);
  }
}

TEST_CASE("simulated misalignment follows the half-normal gain law") {
  const NetworkParams p = default_params();
  const auto dens = baseline_densities(p);
  const MisalignmentModel m{10.0 * kPi / 180};
  const auto law = misalignment_gain_pdf(m, p.antenna_bs, p.antenna_ue);
  Rng rng = make_rng(6, 0, 0);
  const int n = 20000;
  int aligned = 0;
  for (int i = 0; i < n; ++i) {
    if (sample_realization(LinkMode::kD2d, p, dens, m, 10.0, rng).victim_gain > 1e3) ++aligned;
  }
  const double q = law.levels[0].prob;
  CHECK(std::abs(aligned / double(n) - q) <= 3 * std::sqrt(q * (1 - q) / n));
}
