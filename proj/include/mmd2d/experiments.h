// mmd2d/experiments.h
//
// Figure sweeps and the analytic-vs-simulation validation run behind the CLI.
// Every sweep returns a numeric Table whose row order follows the grid order;
// the writers turn it into CSV, a matplotlib script and a JSON manifest.

#ifndef MMD2D_EXPERIMENTS_H_
#define MMD2D_EXPERIMENTS_H_

#include <cstdint>
#include <filesystem>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "mmd2d/config.h"
#include "mmd2d/interference.h"

namespace mmd2d {

inline constexpr const char* kToolVersion = "1.0.0";

/// Bad command-line input (grid syntax, unknown variable, ...).
class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Table {
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;

  /// Index of a column; throws std::out_of_range if absent.
  std::size_t column(std::string_view name) const;
  std::vector<double> column_values(std::string_view name) const;
};

/// Header row plus one record per row, "%.12g" numbers.
std::string to_csv(const Table& table);
void write_text(const std::filesystem::path& path, std::string_view text);

struct AntennaVariant {
  double main_gain_db = 20.0;
  double beamwidth_deg = 30.0;
};

/// One `--grid` argument: `var=values`. Values are a comma list, `a:step:b`
/// or `log:a:b:n`. For `antenna` the list items are `M_db/theta_deg` pairs.
struct SweepSpec {
  std::string variable;
  std::vector<double> values;
  std::vector<AntennaVariant> antennas;  // variable == "antenna" only
};

/// Throws UsageError on syntax errors, unknown variables, empty or
/// non-monotone grids.
SweepSpec parse_sweep(std::string_view text);

struct ExperimentSettings {
  std::int64_t trials = 10000;  // outage trials; mode-selection draws for fig1
  std::uint64_t seed = 1;
  AnalyticOptions analytic;
  double mode_selection_tol = kOuterTolerance;
  unsigned threads = 0;
};

/// Columns T_d, p_L_c, p_d2d_analytic, p_d2d_mc, p_d2d_mc_hw.
Table run_fig1(const NetworkParams& params, std::span<const double> bias_grid, std::span<const double> p_los_grid,
               const ExperimentSettings& settings);

/// The variant is applied to both the BS and the UE main lobe.
NetworkParams with_antenna(NetworkParams params, const AntennaVariant& variant);

/// Columns M_db, theta_deg, Gamma_db, then analytic/mc/mc_hw for each mode.
Table run_fig2(const NetworkParams& params, std::span<const AntennaVariant> variants,
               std::span<const double> gamma_db, const ExperimentSettings& settings);

/// Columns beta, Gamma_db, then analytic/mc/mc_hw for each mode. Beta values
/// must be 0 or 1 and may repeat.
Table run_fig3(const NetworkParams& params, std::span<const double> betas, std::span<const double> gamma_db,
               const ExperimentSettings& settings);

/// Columns sigma_be_deg, Gamma_db, then analytic/mc/mc_hw for each mode.
Table run_fig4(const NetworkParams& params, std::span<const double> sigma_be_deg, std::span<const double> gamma_db,
               const ExperimentSettings& settings);

// Acceptance tolerances of the validation run.
inline constexpr double kOutageAllowance = 0.03;    // plus the MC 95% half-width
inline constexpr double kModeSelectionSigmas = 3.0;  // standard errors
inline constexpr std::int64_t kModeSelectionDrawFactor = 10;  // draws = factor * trials

struct ValidationCheck {
  std::string quantity;  // e.g. "cellular outage at Gamma = 5 dB"
  double analytic = 0.0;
  double simulated = 0.0;
  double half_width = 0.0;
  double allowed = 0.0;  // largest accepted |analytic - simulated|
  bool pass = false;
};

struct ValidationReport {
  std::vector<ValidationCheck> checks;
  Table pd2d;     // p_d2d_analytic, p_d2d_mc, p_d2d_mc_hw, allowed, pass
  Table outage;   // mode (0 cellular, 1 d2d), Gamma_db, analytic, mc, mc_hw, allowed, pass

  bool passed() const;
  std::vector<std::string> failures() const;
  std::string text() const;
};

ValidationReport run_validate(const NetworkParams& params, std::span<const double> gamma_db,
                              const ExperimentSettings& settings);

/// Default grids.
std::vector<double> default_gamma_grid_db();   // -10, -5, ..., 20
std::vector<double> default_bias_grid();       // 1e-2 .. 1e2, four points per decade
std::vector<double> default_p_los_grid();      // 0.5, 1
std::vector<AntennaVariant> default_antenna_variants();
std::vector<double> default_beta_grid();       // 0, 1
std::vector<double> default_sigma_be_grid_deg();  // 0, 2, 5, 10

/// Self-contained matplotlib script reading `csv_name` from its own directory.
std::string plot_script(std::string_view figure, std::string_view csv_name);

/// Lowercase hex SHA-256 of a byte string.
std::string sha256_hex(std::string_view bytes);

struct RunManifest {
  std::string command;
  std::string scenario_path;   // empty: built-in defaults
  std::string scenario_sha256;
  std::uint64_t seed = 0;
  std::int64_t trials = 0;
  double tol = 0.0;
  std::vector<SweepSpec> grids;
  std::vector<std::string> outputs;
};

std::string manifest_json(const RunManifest& manifest);

}  // namespace mmd2d

#endif  // MMD2D_EXPERIMENTS_H_
