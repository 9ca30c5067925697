// mmd2d/interference.h
//
// Uplink SINR outage analytics.
//
// Interferers form independent PPPs that are thinned by antenna gain (four
// sectored-pattern combinations) and by LOS/NLOS class, so the Laplace
// transform of the aggregate interference is a product of per-component
// factors
//
//   exp(-2 pi lambda p_G int_0^inf (1 - (1 + v P G t^-alpha_j / N_j)^-N_j) p_j(t) t dt).
//
// The victim fading is normalized gamma with integer shape N. By default the
// outage bracket uses the bound P(h < x) ~ (1 - exp(-eta x))^N with
// eta = N (N!)^{-1/N}, expanded binomially from n = 0; FadingTail::kExactGamma
// evaluates the exact gamma cdf through derivatives of the Laplace transform.

#ifndef MMD2D_INTERFERENCE_H_
#define MMD2D_INTERFERENCE_H_

#include <array>
#include <span>
#include <string>
#include <vector>

#include "mmd2d/blockage.h"
#include "mmd2d/config.h"
#include "mmd2d/quadrature.h"

namespace mmd2d {

struct GainLevel {
  double gain = 0.0;
  double prob = 0.0;
};

/// Four-point effective antenna gain law, ordered MM, Mm, mM, mm
/// (BS lobe first, UE lobe second).
struct GainDistribution {
  std::array<GainLevel, 4> levels{};

  double total_probability() const;
  double mean() const;
};

/// Interferer beam directions uniform on [0, 2 pi).
GainDistribution gain_distribution(const SectoredAntenna& bs, const SectoredAntenna& ue);

struct InterferencePopulation {
  double density = 0.0;   // per m^2
  double tx_power = 0.0;  // watts
  LosBall ball;           // blockage law of the victim link type
  double alpha_los = 2.0;
  double alpha_nlos = 4.0;
  GainDistribution gains;
  NakagamiOrders nakagami;
};

/// E[exp(-v I)] for the population; v in 1/W.
double laplace_interference(double v, const InterferencePopulation& pop, double tol = kInnerTolerance);

/// d^m/dv^m log E[exp(-v I)] for m = 0..max_order (entry 0 is log L).
/// Requires v > 0 when max_order >= 1.
std::vector<double> log_laplace_derivatives(double v, const InterferencePopulation& pop, int max_order,
                                            double tol = kInnerTolerance);

enum class LinkMode { kCellular, kD2d };

std::string to_string(LinkMode mode);

enum class FadingTail { kGammaBound, kExactGamma };

struct AnalyticOptions {
  double inner_tol = kInnerTolerance;
  double outer_tol = kOuterTolerance;
  FadingTail tail = FadingTail::kGammaBound;
};

/// Interferers seen by a receiver of the given mode: the same-mode population
/// and the cross-mode population, whose transform is taken at beta * v.
struct InterferenceField {
  InterferencePopulation same_mode;
  InterferencePopulation cross_mode;
  double cross_scale = 1.0;  // beta
};

InterferenceField interference_field(LinkMode mode, const NetworkParams& params, const DerivedDensities& dens);

/// The signal side of a victim link.
struct VictimLink {
  double distance = 0.0;
  double exponent = 2.0;
  int nakagami = 1;
  double tx_power = 0.0;
  double gain = 0.0;  // G0
};

/// P(SINR < gamma | victim link), averaged over interference and fading.
double conditional_outage(double gamma, const VictimLink& link, const InterferenceField& field, double noise,
                          const AnalyticOptions& options = {});

/// eta = N (N!)^{-1/N}.
double gamma_bound_eta(int n);

struct OutageEvaluation {
  double probability = 0.0;
  double abs_error_estimate = 0.0;
  /// Where the outer distance integral stopped, per serving class (cellular
  /// mode) or the D2D ball radius (entry 0, D2D mode).
  std::array<double, 2> truncation_radius{};
};

/// Outer distance integrals: serving-BS law for cellular, uniform disk for D2D.
/// Semi-infinite ranges stop where the serving void factor drops below outer_tol^2.
OutageEvaluation evaluate_outage(LinkMode mode, double gamma, const NetworkParams& params,
                                 const DerivedDensities& dens, double g0, const AnalyticOptions& options = {});

double outage_cellular(double gamma, const NetworkParams& params, const DerivedDensities& dens, double g0,
                       const AnalyticOptions& options = {});
double outage_d2d(double gamma, const NetworkParams& params, const DerivedDensities& dens, double g0,
                  const AnalyticOptions& options = {});

/// M_BS * M_UE.
double aligned_gain(const NetworkParams& params);

struct MisalignmentModel {
  double sigma_be = 0.0;  // radians, std-dev of the Gaussian steering error
};

/// P(|eps| <= x) for the half-normal absolute steering error.
double steering_error_cdf(double x, const MisalignmentModel& model);

GainDistribution misalignment_gain_pdf(const MisalignmentModel& model, const SectoredAntenna& bs,
                                       const SectoredAntenna& ue);

double outage_with_misalignment(double gamma, const NetworkParams& params, const DerivedDensities& dens,
                                LinkMode mode, const MisalignmentModel& model, const AnalyticOptions& options = {});

struct OutageCurve {
  std::vector<double> thresholds;     // linear
  std::vector<double> probabilities;
  LinkMode mode = LinkMode::kCellular;
  SpectrumSharing sharing = SpectrumSharing::kUnderlay;
  double sigma_be = 0.0;
};

/// Evaluates the thresholds in parallel; output order follows the input.
OutageCurve outage_curve(LinkMode mode, std::span<const double> thresholds, const NetworkParams& params,
                         const DerivedDensities& dens, const MisalignmentModel& misalignment = {},
                         const AnalyticOptions& options = {});

}  // namespace mmd2d

#endif  // MMD2D_INTERFERENCE_H_
