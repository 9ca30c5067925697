#include "mmd2d/montecarlo.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

#include "mmd2d/parallel.h"

namespace mmd2d {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

// Stream tags keep the outage and mode-selection draws apart for one seed.
constexpr std::uint64_t kOutageStream = 0x6f75746167650000ULL;
constexpr std::uint64_t kModeStream = 0x6d6f646573656c00ULL;

double link_exponent(LinkMode mode, LinkClass s, const NetworkParams& params) {
  const auto& a = params.alpha;
  if (mode == LinkMode::kCellular) return s == LinkClass::kLos ? a.los_cellular : a.nlos_cellular;
  return s == LinkClass::kLos ? a.los_d2d : a.nlos_d2d;
}

int nakagami_order(LinkClass s, const NakagamiOrders& n) { return s == LinkClass::kLos ? n.los : n.nlos; }

double draw_fading(int order, Rng& rng) {
  std::gamma_distribution<double> g(order, 1.0 / order);
  return g(rng);
}

LinkClass draw_class(double distance, const LosBall& ball, Rng& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  return u(rng) < p_link(LinkClass::kLos, distance, ball) ? LinkClass::kLos : LinkClass::kNlos;
}

// Main lobe of a uniformly oriented beam covers the link with probability theta / 2 pi.
double draw_lobe(const SectoredAntenna& antenna, Rng& rng) {
  std::uniform_real_distribution<double> angle(-std::numbers::pi, std::numbers::pi);
  return std::abs(angle(rng)) <= antenna.beamwidth / 2.0 ? antenna.main_gain : antenna.side_gain;
}

double draw_victim_lobe(const SectoredAntenna& antenna, const std::optional<MisalignmentModel>& m, Rng& rng) {
  if (!m || m->sigma_be == 0.0) return antenna.main_gain;
  std::normal_distribution<double> error(0.0, m->sigma_be);
  return std::abs(error(rng)) <= antenna.beamwidth / 2.0 ? antenna.main_gain : antenna.side_gain;
}

// Serving BS under minimum path loss among the sampled BS points.
struct Association {
  double distance = std::numeric_limits<double>::infinity();
  LinkClass link_class = LinkClass::kNlos;
  double path_gain = 0.0;
};

Association associate(const std::vector<Point>& bs, const NetworkParams& params, Rng& rng) {
  Association best;
  for (const Point& p : bs) {
    const double d = std::hypot(p.x, p.y);
    const LinkClass s = draw_class(d, params.los_cellular, rng);
    const double gain = std::pow(d, -cellular_exponent(s, params.alpha));
    if (gain > best.path_gain) best = {d, s, gain};
  }
  return best;
}

void check_trials(std::int64_t trials) {
  if (trials < 1) throw std::invalid_argument("trial count must be >= 1");
}

}  // namespace

Rng make_rng(std::uint64_t seed, std::uint64_t stream, std::uint64_t index) {
  auto lo = [](std::uint64_t v) { return static_cast<std::uint32_t>(v & 0xffffffffULL); };
  auto hi = [](std::uint64_t v) { return static_cast<std::uint32_t>(v >> 32); };
  std::seed_seq seq{lo(seed), hi(seed), lo(stream), hi(stream), lo(index), hi(index)};
  return Rng(seq);
}

std::vector<Point> sample_ppp(double density, double radius, Rng& rng) {
  std::vector<Point> points;
  if (density <= 0.0) return points;
  std::poisson_distribution<long long> count(density * std::numbers::pi * radius * radius);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const long long n = count(rng);
  points.reserve(static_cast<std::size_t>(n));
  for (long long i = 0; i < n; ++i) {
    const double r = radius * std::sqrt(u(rng));
    const double phi = kTwoPi * u(rng);
    points.push_back({r * std::cos(phi), r * std::sin(phi)});
  }
  return points;
}

MonteCarloEstimate bernoulli_estimate(std::int64_t successes, std::int64_t trials, std::uint64_t seed) {
  MonteCarloEstimate e;
  e.trials = trials;
  e.seed = seed;
  if (trials <= 0) return e;
  e.mean = static_cast<double>(successes) / static_cast<double>(trials);
  e.half_width_95 = 1.96 * std::sqrt(e.mean * (1.0 - e.mean) / static_cast<double>(trials));
  return e;
}

double default_disk_radius(const NetworkParams& params) {
  return std::max(5.0 * params.los_cellular.radius, 3.0 / std::sqrt(std::numbers::pi * params.bs_density));
}

double association_radius(const NetworkParams& params) {
  // Void probability of the NLOS BSs: exp(-pi lambda (R^2 - p_L R_B^2)) < 1e-12.
  const LosBall& ball = params.los_cellular;
  const double r2 = -std::log(1e-12) / (std::numbers::pi * params.bs_density) + ball.p_los * ball.radius * ball.radius;
  return std::max(default_disk_radius(params), std::sqrt(r2));
}

NetworkRealization sample_realization(LinkMode mode, const NetworkParams& params, const DerivedDensities& dens,
                                      const std::optional<MisalignmentModel>& misalignment, double disk_radius,
                                      Rng& rng) {
  NetworkRealization w;
  std::uniform_real_distribution<double> u(0.0, 1.0);

  if (mode == LinkMode::kCellular) {
    w.bs_points = sample_ppp(params.bs_density, association_radius(params), rng);
    const Association a = associate(w.bs_points, params, rng);
    w.victim_distance = a.distance;
    w.victim_class = a.link_class;
  } else {
    w.victim_distance = params.los_d2d.radius * std::sqrt(u(rng));
    w.victim_class = draw_class(w.victim_distance, params.los_d2d, rng);
  }
  w.victim_gain = draw_victim_lobe(params.antenna_bs, misalignment, rng) *
                  draw_victim_lobe(params.antenna_ue, misalignment, rng);
  w.victim_fading = draw_fading(nakagami_order(w.victim_class, params.nakagami), rng);

  const bool underlay = params.sharing == SpectrumSharing::kUnderlay;
  const bool with_cellular = mode == LinkMode::kCellular || underlay;
  const bool with_d2d = mode == LinkMode::kD2d || underlay;
  const LosBall& ball = mode == LinkMode::kCellular ? params.los_cellular : params.los_d2d;

  if (with_cellular) w.cellular_interferer_points = sample_ppp(params.bs_density, disk_radius, rng);
  if (with_d2d) w.d2d_interferer_points = sample_ppp(dens.d2d, disk_radius, rng);
  w.interferers.reserve(w.cellular_interferer_points.size() + w.d2d_interferer_points.size());
  auto add = [&](const std::vector<Point>& pts, double power) {
    for (const Point& p : pts) {
      InterfererDraw d;
      d.distance = std::hypot(p.x, p.y);
      d.link_class = draw_class(d.distance, ball, rng);
      d.gain = draw_lobe(params.antenna_bs, rng) * draw_lobe(params.antenna_ue, rng);
      d.fading = draw_fading(nakagami_order(d.link_class, params.nakagami), rng);
      d.tx_power = power;
      w.interferers.push_back(d);
    }
  };
  add(w.cellular_interferer_points, params.cellular_power);
  add(w.d2d_interferer_points, params.d2d_power);
  return w;
}

double realization_sinr(const NetworkRealization& w, LinkMode mode, const NetworkParams& params) {
  if (!std::isfinite(w.victim_distance)) return 0.0;
  const double tx_power = mode == LinkMode::kCellular ? params.cellular_power : params.d2d_power;
  const double signal = tx_power * w.victim_gain * w.victim_fading *
                        std::pow(w.victim_distance, -link_exponent(mode, w.victim_class, params));
  double interference = 0.0;
  for (const InterfererDraw& d : w.interferers) {
    interference += d.tx_power * d.gain * d.fading * std::pow(d.distance, -link_exponent(mode, d.link_class, params));
  }
  return signal / (params.noise_power + interference);
}

std::vector<MonteCarloEstimate> simulate_outage_curve(std::span<const double> gammas, const NetworkParams& params,
                                                      const DerivedDensities& dens, LinkMode mode,
                                                      const std::optional<MisalignmentModel>& misalignment,
                                                      std::int64_t trials, std::uint64_t seed,
                                                      const SimulationOptions& options) {
  check_trials(trials);
  const double radius = options.disk_radius > 0.0 ? options.disk_radius : default_disk_radius(params);
  const std::int64_t batch = std::max<std::int64_t>(1, options.batch_size);
  const std::int64_t batches = (trials + batch - 1) / batch;
  const std::uint64_t stream = kOutageStream + (mode == LinkMode::kCellular ? 0 : 1);

  std::vector<std::vector<std::int64_t>> counts(static_cast<std::size_t>(batches),
                                                std::vector<std::int64_t>(gammas.size(), 0));
  parallel_for(
      static_cast<std::size_t>(batches),
      [&](std::size_t b) {
        Rng rng = make_rng(seed, stream, b);
        const std::int64_t begin = static_cast<std::int64_t>(b) * batch;
        const std::int64_t end = std::min(trials, begin + batch);
        for (std::int64_t t = begin; t < end; ++t) {
          const auto world = sample_realization(mode, params, dens, misalignment, radius, rng);
          const double sinr = realization_sinr(world, mode, params);
          for (std::size_t g = 0; g < gammas.size(); ++g) {
            if (sinr < gammas[g]) ++counts[b][g];
          }
        }
      },
      options.threads);

  std::vector<MonteCarloEstimate> out;
  out.reserve(gammas.size());
  for (std::size_t g = 0; g < gammas.size(); ++g) {
    std::int64_t hits = 0;
    for (const auto& c : counts) hits += c[g];
    out.push_back(bernoulli_estimate(hits, trials, seed));
  }
  return out;
}

MonteCarloEstimate simulate_outage(double gamma, const NetworkParams& params, const DerivedDensities& dens,
                                   LinkMode mode, const std::optional<MisalignmentModel>& misalignment,
                                   std::int64_t trials, std::uint64_t seed, const SimulationOptions& options) {
  const double g[] = {gamma};
  return simulate_outage_curve(g, params, dens, mode, misalignment, trials, seed, options).front();
}

MonteCarloEstimate simulate_mode_selection(const NetworkParams& params, std::int64_t draws, std::uint64_t seed,
                                           const SimulationOptions& options) {
  check_trials(draws);
  const double radius = association_radius(params);
  const std::int64_t batch = std::max<std::int64_t>(1, options.batch_size);
  const std::int64_t batches = (draws + batch - 1) / batch;
  const double bias = params.d2d_bias;
  std::vector<std::int64_t> counts(static_cast<std::size_t>(batches), 0);
  parallel_for(
      static_cast<std::size_t>(batches),
      [&](std::size_t b) {
        Rng rng = make_rng(seed, kModeStream, b);
        std::uniform_real_distribution<double> u(0.0, 1.0);
        const std::int64_t begin = static_cast<std::int64_t>(b) * batch;
        const std::int64_t end = std::min(draws, begin + batch);
        for (std::int64_t t = begin; t < end; ++t) {
          const double rd = params.los_d2d.radius * std::sqrt(u(rng));
          const auto bs = sample_ppp(params.bs_density, radius, rng);
          const Association cell = associate(bs, params, rng);
          bool d2d = false;
          if (std::isinf(bias)) {
            d2d = true;
          } else {
            d2d = bias * std::pow(rd, -params.alpha.los_d2d) >= cell.path_gain;
          }
          if (d2d) ++counts[b];
        }
      },
      options.threads);
  std::int64_t hits = 0;
  for (auto c : counts) hits += c;
  return bernoulli_estimate(hits, draws, seed);
}

}  // namespace mmd2d
