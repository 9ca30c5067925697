// mmd2d/config.h
//
// Scenario parameters for the D2D-enabled mmWave uplink model, the scenario
// file reader/writer, and the derived cellular/D2D UE densities.
//
// Everything in NetworkParams is in linear units: watts, linear antenna gain,
// radians, meters, points per square meter. dB/dBm/degree/mW conversions are
// done only when reading or writing scenario text.

#ifndef MMD2D_CONFIG_H_
#define MMD2D_CONFIG_H_

#include <filesystem>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace mmd2d {

/// Raised for malformed scenario text. `line()` is 1-based, 0 when the
/// problem is not tied to a line (e.g. the file cannot be opened).
class ScenarioError : public std::runtime_error {
 public:
  ScenarioError(const std::string& what, int line = 0)
      : std::runtime_error(line > 0 ? "line " + std::to_string(line) + ": " + what : what),
        line_(line) {}
  int line() const { return line_; }

 private:
  int line_;
};

/// Raised when a parameter set violates a model invariant.
class ValidationError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Main/side-lobe sectored antenna pattern.
struct SectoredAntenna {
  double main_gain = 100.0;                   // linear
  double side_gain = 0.1;                     // linear
  double beamwidth = std::numbers::pi / 6.0;  // radians
};

/// LOS ball: a link of length r is LOS with probability p_los when
/// r <= radius and NLOS otherwise.
struct LosBall {
  double p_los = 1.0;
  double radius = 100.0;  // meters
};

struct PathLossExponents {
  double los_cellular = 2.0;
  double nlos_cellular = 4.0;
  double los_d2d = 2.0;
  double nlos_d2d = 4.0;
};

/// Nakagami orders (gamma shape of the fading power) for LOS/NLOS links.
struct NakagamiOrders {
  int los = 3;
  int nlos = 2;
};

enum class SpectrumSharing { kOverlay = 0, kUnderlay = 1 };

inline constexpr double kInfiniteBias = std::numeric_limits<double>::infinity();

struct NetworkParams {
  double bs_density = 1e-5;       // lambda_B
  double ue_density = 1e-3;       // lambda_U
  double cellular_fraction = 0.2; // q
  double d2d_bias = 1.0;          // T_d, may be kInfiniteBias
  SpectrumSharing sharing = SpectrumSharing::kUnderlay;
  double partition = 0.2;         // delta, overlay spectrum share for D2D
  double cellular_power = 0.2;    // P_c, watts
  double d2d_power = 0.2;         // P_d, watts
  double noise_power = 3.981071705534969e-11;  // -74 dBm in watts
  double threshold = 1.0;         // Gamma, linear
  PathLossExponents alpha;
  NakagamiOrders nakagami;
  SectoredAntenna antenna_bs;
  SectoredAntenna antenna_ue;
  LosBall los_cellular{1.0, 100.0};
  LosBall los_d2d{1.0, 50.0};

  /// beta of the SINR expressions: 1 for underlay, 0 for overlay.
  double beta() const { return sharing == SpectrumSharing::kUnderlay ? 1.0 : 0.0; }
};

/// Baseline scenario.
NetworkParams default_params();

/// Throws ValidationError naming the first violated invariant.
void validate(const NetworkParams& params);

/// Parses scenario text (`key = value` lines, `#` comments). Keys not present
/// keep their default_params() value. Non-fatal notes (e.g. defaulted p_L_d)
/// are appended to `warnings` when given.
NetworkParams parse_scenario(std::string_view text, std::vector<std::string>* warnings = nullptr);

NetworkParams load_scenario(const std::filesystem::path& path,
                            std::vector<std::string>* warnings = nullptr);

/// Writes every parameter in linear-unit keys with round-trip precision.
std::string serialize_scenario(const NetworkParams& params);

struct DerivedDensities {
  double cellular = 0.0;  // lambda_c
  double d2d = 0.0;       // lambda_d
};

DerivedDensities derived_densities(const NetworkParams& params, double p_d2d);

double db_to_linear(double db);
double linear_to_db(double linear);
double dbm_to_watts(double dbm);
double degrees_to_radians(double deg);
double radians_to_degrees(double rad);

}  // namespace mmd2d

#endif  // MMD2D_CONFIG_H_
