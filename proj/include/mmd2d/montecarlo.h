// mmd2d/montecarlo.h
//
// Point-process simulator used as the independent check of the analytic
// engine. Each trial samples a fresh network: BS points around the typical
// transmitter (cellular mode, minimum path-loss association) or a uniform
// D2D partner (D2D mode), interferer PPPs around the receiver at the origin,
// sectored-antenna gains from uniform beam directions, and gamma fading.
//
// Trials run in fixed-size batches. Batch b draws from its own engine seeded
// by (seed, stream, b), so results do not depend on the thread count.

#ifndef MMD2D_MONTECARLO_H_
#define MMD2D_MONTECARLO_H_

#include <cstdint>
#include <optional>
#include <random>
#include <span>
#include <vector>

#include "mmd2d/blockage.h"
#include "mmd2d/config.h"
#include "mmd2d/interference.h"

namespace mmd2d {

using Rng = std::mt19937_64;

/// Independent engine for (seed, stream, index).
Rng make_rng(std::uint64_t seed, std::uint64_t stream, std::uint64_t index);

struct Point {
  double x = 0.0;
  double y = 0.0;
};

/// Homogeneous PPP on the disk of `radius` centred at the origin.
std::vector<Point> sample_ppp(double density, double radius, Rng& rng);

struct InterfererDraw {
  double distance = 0.0;
  LinkClass link_class = LinkClass::kLos;
  double gain = 0.0;
  double fading = 0.0;
  double tx_power = 0.0;
};

struct NetworkRealization {
  std::vector<Point> bs_points;  // around the cellular transmitter; empty in D2D mode
  std::vector<Point> cellular_interferer_points;
  std::vector<Point> d2d_interferer_points;
  std::vector<InterfererDraw> interferers;  // cellular points first, then D2D points

  double victim_distance = 0.0;  // infinite when no BS was sampled
  LinkClass victim_class = LinkClass::kLos;
  double victim_gain = 0.0;
  double victim_fading = 0.0;
};

struct MonteCarloEstimate {
  double mean = 0.0;
  double half_width_95 = 0.0;
  std::int64_t trials = 0;
  std::uint64_t seed = 0;
};

/// Bernoulli estimate with the normal-approximation 95% half-width.
MonteCarloEstimate bernoulli_estimate(std::int64_t successes, std::int64_t trials, std::uint64_t seed);

struct SimulationOptions {
  double disk_radius = 0.0;  // 0: default_disk_radius(params)
  unsigned threads = 0;      // 0: hardware concurrency
  std::int64_t batch_size = 500;
};

/// max(5 R_B,c, 3 / sqrt(pi lambda_B)).
double default_disk_radius(const NetworkParams& params);

/// Radius around a UE that holds its minimum path-loss BS except with
/// probability below ~1e-12.
double association_radius(const NetworkParams& params);

NetworkRealization sample_realization(LinkMode mode, const NetworkParams& params, const DerivedDensities& dens,
                                      const std::optional<MisalignmentModel>& misalignment, double disk_radius,
                                      Rng& rng);

double realization_sinr(const NetworkRealization& world, LinkMode mode, const NetworkParams& params);

MonteCarloEstimate simulate_outage(double gamma, const NetworkParams& params, const DerivedDensities& dens,
                                   LinkMode mode, const std::optional<MisalignmentModel>& misalignment,
                                   std::int64_t trials, std::uint64_t seed, const SimulationOptions& options = {});

/// One set of realizations scored against every threshold.
std::vector<MonteCarloEstimate> simulate_outage_curve(std::span<const double> gammas, const NetworkParams& params,
                                                      const DerivedDensities& dens, LinkMode mode,
                                                      const std::optional<MisalignmentModel>& misalignment,
                                                      std::int64_t trials, std::uint64_t seed,
                                                      const SimulationOptions& options = {});

/// Frequency with which a potential D2D UE picks D2D mode.
MonteCarloEstimate simulate_mode_selection(const NetworkParams& params, std::int64_t draws, std::uint64_t seed,
                                           const SimulationOptions& options = {});

}  // namespace mmd2d

#endif  // MMD2D_MONTECARLO_H_
