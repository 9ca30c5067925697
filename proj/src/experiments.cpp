#include "mmd2d/experiments.h"

#include <openssl/evp.h>

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <optional>
#include <sstream>

#include "json.hpp"
#include "mmd2d/mode_selection.h"
#include "mmd2d/montecarlo.h"
#include "mmd2d/parallel.h"

namespace mmd2d {

namespace {

constexpr std::array<LinkMode, 2> kModes = {LinkMode::kCellular, LinkMode::kD2d};

std::string format_number(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t");
  return std::string(s.substr(b, e - b + 1));
}

std::vector<std::string> split(std::string_view s, char sep) {
  std::vector<std::string> parts;
  std::size_t start = 0;
  while (true) {
    const auto pos = s.find(sep, start);
    parts.push_back(trim(s.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start)));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return parts;
}

double parse_number(const std::string& token, std::string_view context) {
  if (token == "inf" || token == "Inf" || token == "infinity") return std::numeric_limits<double>::infinity();
  double v = 0.0;
  const char* first = token.data();
  const char* last = token.data() + token.size();
  auto [ptr, ec] = std::from_chars(first, last, v);
  if (token.empty() || ec != std::errc() || ptr != last) {
    throw UsageError("bad number '" + token + "' in grid " + std::string(context));
  }
  return v;
}

std::vector<double> parse_values(const std::string& body, std::string_view context) {
  std::vector<double> out;
  const auto colon = split(body, ':');
  if (colon.size() == 4 && colon[0] == "log") {
    const double a = parse_number(colon[1], context);
    const double b = parse_number(colon[2], context);
    const double n = parse_number(colon[3], context);
    if (!(a > 0.0 && b > 0.0 && std::isfinite(a) && std::isfinite(b))) {
      throw UsageError("log grid bounds must be positive: " + std::string(context));
    }
    if (!(n >= 1.0 && n == std::floor(n) && n <= 1e6)) {
      throw UsageError("log grid needs a positive integer point count: " + std::string(context));
    }
    const int count = static_cast<int>(n);
    const double la = std::log10(a);
    const double lb = std::log10(b);
    for (int i = 0; i < count; ++i) {
      out.push_back(count == 1 ? a : std::pow(10.0, la + (lb - la) * i / (count - 1)));
    }
    return out;
  }
  if (colon.size() == 3) {
    const double a = parse_number(colon[0], context);
    const double step = parse_number(colon[1], context);
    const double b = parse_number(colon[2], context);
    if (step == 0.0 || !std::isfinite(step) || (b - a) / step < 0.0) {
      throw UsageError("range step does not lead from start to stop: " + std::string(context));
    }
    const double span = (b - a) / step;
    if (span > 1e6) throw UsageError("range has too many points: " + std::string(context));
    const int count = static_cast<int>(std::floor(span + 1e-9)) + 1;
    for (int i = 0; i < count; ++i) out.push_back(a + step * i);
    return out;
  }
  if (colon.size() != 1) throw UsageError("cannot parse grid values: " + std::string(context));
  for (const auto& item : split(body, ',')) out.push_back(parse_number(item, context));
  return out;
}

bool strictly_monotone(const std::vector<double>& v) {
  if (v.size() < 2) return true;
  const bool up = v[1] > v[0];
  for (std::size_t i = 1; i < v.size(); ++i) {
    if (up ? !(v[i] > v[i - 1]) : !(v[i] < v[i - 1])) return false;
  }
  return true;
}

std::vector<double> to_linear(std::span<const double> db) {
  std::vector<double> out;
  out.reserve(db.size());
  for (double d : db) out.push_back(db_to_linear(d));
  return out;
}

// Analytic and simulated outage on one threshold grid for both modes.
struct ModeCurves {
  std::array<std::vector<double>, 2> analytic;
  std::array<std::vector<MonteCarloEstimate>, 2> simulated;
};

ModeCurves mode_curves(const NetworkParams& params, std::span<const double> gamma_db, double sigma_be,
                       const ExperimentSettings& settings) {
  validate(params);
  const double pd = p_d2d(params, settings.mode_selection_tol).p_d2d;
  const DerivedDensities dens = derived_densities(params, pd);
  const std::vector<double> gammas = to_linear(gamma_db);
  const MisalignmentModel misalignment{sigma_be};
  std::optional<MisalignmentModel> mc_misalignment;
  if (sigma_be > 0.0) mc_misalignment = misalignment;
  SimulationOptions sim;
  sim.threads = settings.threads;

  ModeCurves out;
  for (std::size_t m = 0; m < kModes.size(); ++m) {
    out.analytic[m] = outage_curve(kModes[m], gammas, params, dens, misalignment, settings.analytic).probabilities;
    out.simulated[m] = simulate_outage_curve(gammas, params, dens, kModes[m], mc_misalignment, settings.trials,
                                             settings.seed, sim);
  }
  return out;
}

std::vector<std::string> outage_columns(std::vector<std::string> leading) {
  for (LinkMode mode : kModes) {
    const std::string name = to_string(mode);
    leading.push_back(name + "_analytic");
    leading.push_back(name + "_mc");
    leading.push_back(name + "_mc_hw");
  }
  return leading;
}

void append_curve_rows(Table& table, const std::vector<double>& lead, std::span<const double> gamma_db,
                       const ModeCurves& curves) {
  for (std::size_t i = 0; i < gamma_db.size(); ++i) {
    std::vector<double> row = lead;
    row.push_back(gamma_db[i]);
    for (std::size_t m = 0; m < kModes.size(); ++m) {
      row.push_back(curves.analytic[m][i]);
      row.push_back(curves.simulated[m][i].mean);
      row.push_back(curves.simulated[m][i].half_width_95);
    }
    table.rows.push_back(std::move(row));
  }
}

std::string format_check(const ValidationCheck& c) {
  char buf[256];
  std::snprintf(buf, sizeof buf, "%s  %-36s analytic=%.6f  mc=%.6f  |diff|=%.6f  allowed=%.6f", c.pass ? "PASS" : "FAIL",
                c.quantity.c_str(), c.analytic, c.simulated, std::abs(c.analytic - c.simulated), c.allowed);
  return buf;
}

}  // namespace

std::size_t Table::column(std::string_view name) const {
  for (std::size_t i = 0; i < columns.size(); ++i) {
    if (columns[i] == name) return i;
  }
  throw std::out_of_range("no column " + std::string(name));
}

std::vector<double> Table::column_values(std::string_view name) const {
  const std::size_t c = column(name);
  std::vector<double> out;
  out.reserve(rows.size());
  for (const auto& row : rows) out.push_back(row[c]);
  return out;
}

std::string to_csv(const Table& table) {
  std::string out;
  for (std::size_t i = 0; i < table.columns.size(); ++i) {
    if (i) out += ',';
    out += table.columns[i];
  }
  out += '\n';
  for (const auto& row : table.rows) {
    for (std::size_t i = 0; i < row.size(); ++i) {
      if (i) out += ',';
      out += format_number(row[i]);
    }
    out += '\n';
  }
  return out;
}

void write_text(const std::filesystem::path& path, std::string_view text) {
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw std::runtime_error("cannot write " + path.string());
  f.write(text.data(), static_cast<std::streamsize>(text.size()));
  if (!f) throw std::runtime_error("write failed for " + path.string());
}

SweepSpec parse_sweep(std::string_view text) {
  const auto eq = text.find('=');
  if (eq == std::string_view::npos) throw UsageError("grid must look like var=values: " + std::string(text));
  SweepSpec spec;
  spec.variable = trim(text.substr(0, eq));
  const std::string body = trim(text.substr(eq + 1));
  static const std::array<std::string_view, 6> kAllowed = {"T_d", "p_L_c", "Gamma_db", "beta", "sigma_be", "antenna"};
  if (std::find(kAllowed.begin(), kAllowed.end(), spec.variable) == kAllowed.end()) {
    throw UsageError("unknown grid variable '" + spec.variable +
                     "' (allowed: T_d, p_L_c, Gamma_db, beta, sigma_be, antenna)");
  }
  if (body.empty()) throw UsageError("grid for " + spec.variable + " is empty");

  if (spec.variable == "antenna") {
    for (const auto& item : split(body, ',')) {
      const auto pair = split(item, '/');
      if (pair.size() != 2) throw UsageError("antenna grid items are M_db/theta_deg pairs: " + item);
      AntennaVariant v{parse_number(pair[0], text), parse_number(pair[1], text)};
      if (!(v.beamwidth_deg > 0.0 && v.beamwidth_deg <= 360.0) || !std::isfinite(v.main_gain_db)) {
        throw UsageError("antenna variant out of range: " + item);
      }
      for (const auto& seen : spec.antennas) {
        if (seen.main_gain_db == v.main_gain_db && seen.beamwidth_deg == v.beamwidth_deg) {
          throw UsageError("antenna variant repeated: " + item);
        }
      }
      spec.antennas.push_back(v);
    }
    return spec;
  }

  spec.values = parse_values(body, text);
  if (spec.values.empty()) throw UsageError("grid for " + spec.variable + " is empty");
  if (!strictly_monotone(spec.values)) throw UsageError("grid for " + spec.variable + " must be strictly monotone");
  for (double v : spec.values) {
    if (std::isnan(v)) throw UsageError("grid for " + spec.variable + " contains nan");
    if (spec.variable == "T_d" && v < 0.0) throw UsageError("T_d values must be >= 0");
    if (spec.variable == "p_L_c" && !(v >= 0.0 && v <= 1.0)) throw UsageError("p_L_c values must lie in [0,1]");
    if (spec.variable == "beta" && v != 0.0 && v != 1.0) throw UsageError("beta values must be 0 or 1");
    if (spec.variable == "sigma_be" && !(v >= 0.0 && std::isfinite(v))) {
      throw UsageError("sigma_be values must be finite and >= 0");
    }
    if (spec.variable == "Gamma_db" && !std::isfinite(v)) throw UsageError("Gamma_db values must be finite");
  }
  return spec;
}

Table run_fig1(const NetworkParams& params, std::span<const double> bias_grid, std::span<const double> p_los_grid,
               const ExperimentSettings& settings) {
  Table table;
  table.columns = {"T_d", "p_L_c", "p_d2d_analytic", "p_d2d_mc", "p_d2d_mc_hw"};
  struct Point {
    NetworkParams params;
    double analytic = 0.0;
  };
  std::vector<Point> points;
  for (double pl : p_los_grid) {
    for (double td : bias_grid) {
      NetworkParams p = params;
      p.los_cellular.p_los = pl;
      p.d2d_bias = td;
      validate(p);
      points.push_back({p, 0.0});
    }
  }
  parallel_for(
      points.size(), [&](std::size_t i) { points[i].analytic = p_d2d(points[i].params, settings.mode_selection_tol).p_d2d; },
      settings.threads);
  SimulationOptions sim;
  sim.threads = settings.threads;
  for (const Point& pt : points) {
    const auto mc = simulate_mode_selection(pt.params, settings.trials, settings.seed, sim);
    table.rows.push_back({pt.params.d2d_bias, pt.params.los_cellular.p_los, pt.analytic, mc.mean, mc.half_width_95});
  }
  return table;
}

NetworkParams with_antenna(NetworkParams params, const AntennaVariant& variant) {
  for (SectoredAntenna* a : {&params.antenna_bs, &params.antenna_ue}) {
    a->main_gain = db_to_linear(variant.main_gain_db);
    a->beamwidth = degrees_to_radians(variant.beamwidth_deg);
  }
  return params;
}

Table run_fig2(const NetworkParams& params, std::span<const AntennaVariant> variants,
               std::span<const double> gamma_db, const ExperimentSettings& settings) {
  Table table;
  table.columns = outage_columns({"M_db", "theta_deg", "Gamma_db"});
  for (const AntennaVariant& v : variants) {
    const ModeCurves curves = mode_curves(with_antenna(params, v), gamma_db, 0.0, settings);
    append_curve_rows(table, {v.main_gain_db, v.beamwidth_deg}, gamma_db, curves);
  }
  return table;
}

Table run_fig3(const NetworkParams& params, std::span<const double> betas, std::span<const double> gamma_db,
               const ExperimentSettings& settings) {
  Table table;
  table.columns = outage_columns({"beta", "Gamma_db"});
  for (double beta : betas) {
    if (beta != 0.0 && beta != 1.0) throw ValidationError("beta must be 0 or 1");
    NetworkParams p = params;
    p.sharing = beta == 1.0 ? SpectrumSharing::kUnderlay : SpectrumSharing::kOverlay;
    append_curve_rows(table, {beta}, gamma_db, mode_curves(p, gamma_db, 0.0, settings));
  }
  return table;
}

Table run_fig4(const NetworkParams& params, std::span<const double> sigma_be_deg, std::span<const double> gamma_db,
               const ExperimentSettings& settings) {
  Table table;
  table.columns = outage_columns({"sigma_be_deg", "Gamma_db"});
  for (double s : sigma_be_deg) {
    if (!(s >= 0.0)) throw ValidationError("sigma_be must be >= 0");
    append_curve_rows(table, {s}, gamma_db, mode_curves(params, gamma_db, degrees_to_radians(s), settings));
  }
  return table;
}

bool ValidationReport::passed() const {
  return std::all_of(checks.begin(), checks.end(), [](const ValidationCheck& c) { return c.pass; });
}

std::vector<std::string> ValidationReport::failures() const {
  std::vector<std::string> out;
  for (const auto& c : checks) {
    if (!c.pass) out.push_back(c.quantity);
  }
  return out;
}

std::string ValidationReport::text() const {
  std::string out;
  for (const auto& c : checks) out += format_check(c) + '\n';
  const auto failed = failures();
  if (failed.empty()) {
    out += "validation passed (" + std::to_string(checks.size()) + " checks)\n";
  } else {
    out += "validation FAILED for " + std::to_string(failed.size()) + " of " + std::to_string(checks.size()) +
           " checks:\n";
    for (const auto& q : failed) out += "  " + q + '\n';
  }
  return out;
}

ValidationReport run_validate(const NetworkParams& params, std::span<const double> gamma_db,
                              const ExperimentSettings& settings) {
  validate(params);
  ValidationReport report;
  SimulationOptions sim;
  sim.threads = settings.threads;

  // Mode selection: binomial test at the analytic value.
  const std::int64_t draws = kModeSelectionDrawFactor * settings.trials;
  const double pd = p_d2d(params, settings.mode_selection_tol).p_d2d;
  const auto mc_pd = simulate_mode_selection(params, draws, settings.seed, sim);
  ValidationCheck pd_check;
  pd_check.quantity = "p_d2d";
  pd_check.analytic = pd;
  pd_check.simulated = mc_pd.mean;
  pd_check.half_width = mc_pd.half_width_95;
  const double pd_null = std::clamp(pd, 0.0, 1.0);
  pd_check.allowed = kModeSelectionSigmas * std::sqrt(pd_null * (1.0 - pd_null) / static_cast<double>(draws)) + 1e-9;
  pd_check.pass = std::abs(pd - mc_pd.mean) <= pd_check.allowed;
  report.checks.push_back(pd_check);
  report.pd2d.columns = {"p_d2d_analytic", "p_d2d_mc", "p_d2d_mc_hw", "allowed", "pass"};
  report.pd2d.rows.push_back({pd, mc_pd.mean, mc_pd.half_width_95, pd_check.allowed, pd_check.pass ? 1.0 : 0.0});

  const DerivedDensities dens = derived_densities(params, pd);
  const std::vector<double> gammas = to_linear(gamma_db);
  report.outage.columns = {"mode", "Gamma_db", "analytic", "mc", "mc_hw", "allowed", "pass"};
  for (std::size_t m = 0; m < kModes.size(); ++m) {
    const auto analytic = outage_curve(kModes[m], gammas, params, dens, {}, settings.analytic);
    const auto simulated =
        simulate_outage_curve(gammas, params, dens, kModes[m], std::nullopt, settings.trials, settings.seed, sim);
    for (std::size_t i = 0; i < gammas.size(); ++i) {
      ValidationCheck c;
      c.quantity = to_string(kModes[m]) + " outage at Gamma = " + format_number(gamma_db[i]) + " dB";
      c.analytic = analytic.probabilities[i];
      c.simulated = simulated[i].mean;
      c.half_width = simulated[i].half_width_95;
      c.allowed = kOutageAllowance + c.half_width;
      c.pass = std::abs(c.analytic - c.simulated) <= c.allowed;
      report.checks.push_back(c);
      report.outage.rows.push_back({static_cast<double>(m), gamma_db[i], c.analytic, c.simulated, c.half_width,
                                    c.allowed, c.pass ? 1.0 : 0.0});
    }
  }
  return report;
}

std::vector<double> default_gamma_grid_db() { return {-10, -5, 0, 5, 10, 15, 20}; }

std::vector<double> default_bias_grid() {
  std::vector<double> g;
  for (int i = 0; i <= 16; ++i) g.push_back(std::pow(10.0, -2.0 + i / 4.0));
  return g;
}

std::vector<double> default_p_los_grid() { return {0.5, 1.0}; }

std::vector<AntennaVariant> default_antenna_variants() { return {{20.0, 30.0}, {25.0, 30.0}, {20.0, 90.0}}; }

std::vector<double> default_beta_grid() { return {0.0, 1.0}; }

std::vector<double> default_sigma_be_grid_deg() { return {0.0, 2.0, 5.0, 10.0}; }

std::string plot_script(std::string_view figure, std::string_view csv_name) {
  // Per figure: x column, log x axis, group columns, y series.
  std::string x = "Gamma_db";
  std::string xlabel = "SINR threshold (dB)";
  std::string groups;
  std::string series = "[('cellular', 'cellular_analytic', 'cellular_mc', 'cellular_mc_hw'), "
                       "('d2d', 'd2d_analytic', 'd2d_mc', 'd2d_mc_hw')]";
  std::string ylabel = "outage probability";
  bool logx = false;
  if (figure == "fig1") {
    x = "T_d";
    xlabel = "D2D biasing factor T_d";
    groups = "['p_L_c']";
    series = "[('D2D mode', 'p_d2d_analytic', 'p_d2d_mc', 'p_d2d_mc_hw')]";
    ylabel = "probability of D2D mode";
    logx = true;
  } else if (figure == "fig2") {
    groups = "['M_db', 'theta_deg']";
  } else if (figure == "fig3") {
    groups = "['beta']";
  } else if (figure == "fig4") {
    groups = "['sigma_be_deg']";
  } else {
    throw std::invalid_argument("no plot layout for " + std::string(figure));
  }

  std::ostringstream s;
  s << "#!/usr/bin/env python3\n"
    << "# Plots " << csv_name << " (analytic lines, simulation markers with 95% bars).\n"
    << "import csv\nimport os\nimport sys\n\n"
    << "import matplotlib\nmatplotlib.use('Agg')\nimport matplotlib.pyplot as plt\n\n"
    << "HERE = os.path.dirname(os.path.abspath(__file__))\n"
    << "CSV = os.path.join(HERE, '" << csv_name << "')\n"
    << "X = '" << x << "'\nGROUPS = " << groups << "\nSERIES = " << series << "\n\n"
    << "with open(CSV, newline='') as f:\n"
    << "    rows = [{k: float(v) for k, v in r.items()} for r in csv.DictReader(f)]\n\n"
    << "keys = []\nfor r in rows:\n"
    << "    k = tuple(r[g] for g in GROUPS)\n"
    << "    if k not in keys:\n        keys.append(k)\n\n"
    << "fig, axes = plt.subplots(1, len(SERIES), figsize=(6 * len(SERIES), 4.5), squeeze=False)\n"
    << "for ax, (title, ya, ym, yh) in zip(axes[0], SERIES):\n"
    << "    for k in keys:\n"
    << "        sel = [r for r in rows if tuple(r[g] for g in GROUPS) == k]\n"
    << "        label = ', '.join('%s=%g' % (g, v) for g, v in zip(GROUPS, k))\n"
    << "        xs = [r[X] for r in sel]\n"
    << "        line, = ax.plot(xs, [r[ya] for r in sel], label=label)\n"
    << "        ax.errorbar(xs, [r[ym] for r in sel], yerr=[r[yh] for r in sel], fmt='o',\n"
    << "                    color=line.get_color(), markersize=4, capsize=2)\n"
    << (logx ? "    ax.set_xscale('log')\n" : "")
    << "    ax.set_title(title)\n"
    << "    ax.set_xlabel('" << xlabel << "')\n"
    << "    ax.set_ylabel('" << ylabel << "')\n"
    << "    ax.grid(True, alpha=0.3)\n"
    << "    ax.legend(fontsize=8)\n"
    << "fig.tight_layout()\n"
    << "out = sys.argv[1] if len(sys.argv) > 1 else os.path.splitext(CSV)[0] + '.png'\n"
    << "fig.savefig(out, dpi=150)\n";
  return s.str();
}

std::string sha256_hex(std::string_view bytes) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), digest, &len, EVP_sha256(), nullptr) != 1) {
    throw std::runtime_error("SHA-256 failed");
  }
  static const char* kHex = "0123456789abcdef";
  std::string out;
  out.reserve(2 * len);
  for (unsigned int i = 0; i < len; ++i) {
    out += kHex[digest[i] >> 4];
    out += kHex[digest[i] & 0xf];
  }
  return out;
}

std::string manifest_json(const RunManifest& m) {
  nlohmann::ordered_json j;
  j["tool"] = "mmd2d";
  j["version"] = kToolVersion;
  j["command"] = m.command;
  j["scenario"] = m.scenario_path.empty() ? nlohmann::ordered_json(nullptr) : nlohmann::ordered_json(m.scenario_path);
  j["scenario_sha256"] = m.scenario_sha256;
  j["seed"] = m.seed;
  j["trials"] = m.trials;
  j["tol"] = m.tol;
  auto grids = nlohmann::ordered_json::object();
  for (const SweepSpec& g : m.grids) {
    if (g.variable == "antenna") {
      auto list = nlohmann::ordered_json::array();
      for (const auto& a : g.antennas) list.push_back({{"M_db", a.main_gain_db}, {"theta_deg", a.beamwidth_deg}});
      grids[g.variable] = list;
    } else {
      auto list = nlohmann::ordered_json::array();
      for (double v : g.values) list.push_back(std::isinf(v) ? nlohmann::ordered_json("inf") : nlohmann::ordered_json(v));
      grids[g.variable] = list;
    }
  }
  j["grid"] = grids;
  j["outputs"] = m.outputs;
  return j.dump(2) + "\n";
}

}  // namespace mmd2d
