// mmd2d: figure sweeps, analytic-vs-simulation validation and single-point
// queries for the D2D mmWave uplink model.
//
// Exit status: 0 success, 1 validation failure (or a runtime error),
// 2 usage, grid or scenario error.

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "mmd2d/config.h"
#include "mmd2d/experiments.h"
#include "mmd2d/interference.h"
#include "mmd2d/mode_selection.h"
#include "mmd2d/montecarlo.h"

namespace fs = std::filesystem;
using namespace mmd2d;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitValidation = 1;
constexpr int kExitUsage = 2;

struct CommonFlags {
  std::string scenario;
  std::string out = "results";
  std::int64_t trials = 10000;
  std::uint64_t seed = 1;
  std::vector<std::string> grids;
  double tol = kOuterTolerance;
  unsigned threads = 0;
  bool exact_gamma = false;
};

void add_common(CLI::App* cmd, CommonFlags& f, bool with_out) {
  cmd->add_option("--scenario", f.scenario, "scenario file (default: built-in baseline)");
  if (with_out) cmd->add_option("--out", f.out, "output directory")->capture_default_str();
  cmd->add_option("--trials", f.trials, "Monte Carlo trials")->capture_default_str();
  cmd->add_option("--seed", f.seed, "random seed")->capture_default_str();
  cmd->add_option("--grid", f.grids, "sweep grid var=values (repeatable)");
  cmd->add_option("--tol", f.tol, "outer quadrature tolerance")->capture_default_str();
  cmd->add_option("--threads", f.threads, "worker threads (0: all cores)");
  cmd->add_flag("--exact-gamma", f.exact_gamma, "use the exact gamma cdf instead of the bound");
}

struct Loaded {
  NetworkParams params;
  std::string text;  // hashed into the manifest
};

Loaded load(const CommonFlags& f) {
  Loaded l;
  if (f.scenario.empty()) {
    l.params = default_params();
    l.text = serialize_scenario(l.params);
    return l;
  }
  std::ifstream in(f.scenario, std::ios::binary);
  if (!in) throw ScenarioError("cannot open scenario file " + f.scenario);
  std::ostringstream ss;
  ss << in.rdbuf();
  l.text = ss.str();
  std::vector<std::string> warnings;
  l.params = parse_scenario(l.text, &warnings);
  for (const auto& w : warnings) std::cerr << "warning: " << w << '\n';
  return l;
}

ExperimentSettings settings_from(const CommonFlags& f, bool need_trials = true) {
  if (need_trials && f.trials < 1) throw UsageError("--trials must be >= 1");
  if (!(f.tol > 0.0)) throw UsageError("--tol must be positive");
  ExperimentSettings s;
  s.trials = f.trials;
  s.seed = f.seed;
  s.analytic.outer_tol = f.tol;
  s.mode_selection_tol = f.tol;
  s.threads = f.threads;
  if (f.exact_gamma) s.analytic.tail = FadingTail::kExactGamma;
  return s;
}

// Parses the --grid flags, accepting only `allowed` variables, each once.
std::map<std::string, SweepSpec> parse_grids(const std::vector<std::string>& raw,
                                             std::initializer_list<std::string> allowed) {
  std::map<std::string, SweepSpec> out;
  for (const auto& g : raw) {
    SweepSpec spec = parse_sweep(g);
    if (std::find(allowed.begin(), allowed.end(), spec.variable) == allowed.end()) {
      std::string list;
      for (const auto& a : allowed) list += (list.empty() ? "" : ", ") + a;
      throw UsageError("grid variable '" + spec.variable + "' does not apply here (allowed: " + list + ")");
    }
    if (out.count(spec.variable)) throw UsageError("grid variable '" + spec.variable + "' given twice");
    out[spec.variable] = std::move(spec);
  }
  return out;
}

std::vector<double> grid_or(const std::map<std::string, SweepSpec>& grids, const std::string& var,
                            std::vector<double> fallback) {
  auto it = grids.find(var);
  return it == grids.end() ? fallback : it->second.values;
}

void emit(const std::string& command, const CommonFlags& f, const Loaded& scenario,
          const std::vector<SweepSpec>& grids, const std::vector<std::pair<std::string, std::string>>& files) {
  fs::create_directories(f.out);
  RunManifest m;
  m.command = command;
  m.scenario_path = f.scenario;
  m.scenario_sha256 = sha256_hex(scenario.text);
  m.seed = f.seed;
  m.trials = f.trials;
  m.tol = f.tol;
  m.grids = grids;
  for (const auto& [name, body] : files) {
    write_text(fs::path(f.out) / name, body);
    m.outputs.push_back(name);
  }
  const std::string manifest = command + "_manifest.json";
  m.outputs.push_back(manifest);
  write_text(fs::path(f.out) / manifest, manifest_json(m));
  for (const auto& name : m.outputs) std::cout << "wrote " << (fs::path(f.out) / name).string() << '\n';
}

SweepSpec as_spec(const std::string& var, const std::vector<double>& values) {
  SweepSpec s;
  s.variable = var;
  s.values = values;
  return s;
}

int run_figure(const std::string& fig, const CommonFlags& f) {
  const Loaded sc = load(f);
  const ExperimentSettings st = settings_from(f);
  Table table;
  std::vector<SweepSpec> used;
  if (fig == "fig1") {
    const auto g = parse_grids(f.grids, {"T_d", "p_L_c"});
    const auto td = grid_or(g, "T_d", default_bias_grid());
    const auto pl = grid_or(g, "p_L_c", default_p_los_grid());
    used = {as_spec("T_d", td), as_spec("p_L_c", pl)};
    table = run_fig1(sc.params, td, pl, st);
  } else if (fig == "fig2") {
    const auto g = parse_grids(f.grids, {"antenna", "Gamma_db"});
    const auto gamma = grid_or(g, "Gamma_db", default_gamma_grid_db());
    auto variants = default_antenna_variants();
    if (auto it = g.find("antenna"); it != g.end()) variants = it->second.antennas;
    SweepSpec a;
    a.variable = "antenna";
    a.antennas = variants;
    used = {a, as_spec("Gamma_db", gamma)};
    table = run_fig2(sc.params, variants, gamma, st);
  } else if (fig == "fig3") {
    const auto g = parse_grids(f.grids, {"beta", "Gamma_db"});
    const auto beta = grid_or(g, "beta", default_beta_grid());
    const auto gamma = grid_or(g, "Gamma_db", default_gamma_grid_db());
    used = {as_spec("beta", beta), as_spec("Gamma_db", gamma)};
    table = run_fig3(sc.params, beta, gamma, st);
  } else {
    const auto g = parse_grids(f.grids, {"sigma_be", "Gamma_db"});
    const auto sigma = grid_or(g, "sigma_be", default_sigma_be_grid_deg());
    const auto gamma = grid_or(g, "Gamma_db", default_gamma_grid_db());
    used = {as_spec("sigma_be", sigma), as_spec("Gamma_db", gamma)};
    table = run_fig4(sc.params, sigma, gamma, st);
  }
  const std::string csv = fig + ".csv";
  emit(fig, f, sc, used, {{csv, to_csv(table)}, {fig + "_plot.py", plot_script(fig, csv)}});
  return kExitOk;
}

int run_validate_cmd(const CommonFlags& f) {
  const Loaded sc = load(f);
  const ExperimentSettings st = settings_from(f);
  const auto g = parse_grids(f.grids, {"Gamma_db"});
  const auto gamma = grid_or(g, "Gamma_db", default_gamma_grid_db());
  const ValidationReport report = run_validate(sc.params, gamma, st);
  const std::string text = report.text();
  std::cout << text;
  emit("validate", f, sc, {as_spec("Gamma_db", gamma)},
       {{"validate_pd2d.csv", to_csv(report.pd2d)},
        {"validate_outage.csv", to_csv(report.outage)},
        {"validate_report.txt", text}});
  return report.passed() ? kExitOk : kExitValidation;
}

int run_pd2d_cmd(const CommonFlags& f) {
  const Loaded sc = load(f);
  const ExperimentSettings st = settings_from(f, false);
  parse_grids(f.grids, {});
  validate(sc.params);
  const ModeSelectionResult r = p_d2d(sc.params, st.mode_selection_tol);
  std::printf("T_d,p_L_c,p_d2d_analytic,cellular_los_term,cellular_nlos_term");
  if (f.trials > 0) std::printf(",p_d2d_mc,p_d2d_mc_hw");
  std::printf("\n%.12g,%.12g,%.12g,%.12g,%.12g", sc.params.d2d_bias, sc.params.los_cellular.p_los, r.p_d2d,
              r.per_class_terms[0], r.per_class_terms[1]);
  if (f.trials > 0) {
    SimulationOptions sim;
    sim.threads = f.threads;
    const auto mc = simulate_mode_selection(sc.params, f.trials, f.seed, sim);
    std::printf(",%.12g,%.12g", mc.mean, mc.half_width_95);
  }
  std::printf("\n");
  return kExitOk;
}

int run_outage_cmd(const CommonFlags& f, const std::string& mode_name, double sigma_be_deg) {
  const Loaded sc = load(f);
  const ExperimentSettings st = settings_from(f, false);
  if (!(sigma_be_deg >= 0.0)) throw ValidationError("sigma_be must be >= 0");
  std::vector<LinkMode> modes;
  if (mode_name == "cellular" || mode_name == "both") modes.push_back(LinkMode::kCellular);
  if (mode_name == "d2d" || mode_name == "both") modes.push_back(LinkMode::kD2d);
  const auto g = parse_grids(f.grids, {"Gamma_db"});
  const auto gamma_db = grid_or(g, "Gamma_db", {linear_to_db(sc.params.threshold)});
  validate(sc.params);
  const double pd = p_d2d(sc.params, st.mode_selection_tol).p_d2d;
  const DerivedDensities dens = derived_densities(sc.params, pd);
  std::vector<double> gammas;
  for (double d : gamma_db) gammas.push_back(db_to_linear(d));
  const MisalignmentModel mis{degrees_to_radians(sigma_be_deg)};
  std::optional<MisalignmentModel> mc_mis;
  if (mis.sigma_be > 0.0) mc_mis = mis;

  Table t;
  t.columns = {"mode", "Gamma_db", "analytic"};
  if (f.trials > 0) {
    t.columns.push_back("mc");
    t.columns.push_back("mc_hw");
  }
  for (LinkMode m : modes) {
    const auto curve = outage_curve(m, gammas, sc.params, dens, mis, st.analytic);
    std::vector<MonteCarloEstimate> mc;
    if (f.trials > 0) {
      SimulationOptions sim;
      sim.threads = f.threads;
      mc = simulate_outage_curve(gammas, sc.params, dens, m, mc_mis, f.trials, f.seed, sim);
    }
    for (std::size_t i = 0; i < gammas.size(); ++i) {
      std::vector<double> row = {m == LinkMode::kCellular ? 0.0 : 1.0, gamma_db[i], curve.probabilities[i]};
      if (f.trials > 0) {
        row.push_back(mc[i].mean);
        row.push_back(mc[i].half_width_95);
      }
      t.rows.push_back(row);
    }
  }
  std::cout << to_csv(t);
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Uplink SINR outage and mode selection for D2D-enabled mmWave cellular networks"};
  app.require_subcommand(1);
  app.set_version_flag("--version", kToolVersion);

  CommonFlags flags;
  std::map<std::string, CLI::App*> figs;
  for (const char* fig : {"fig1", "fig2", "fig3", "fig4"}) {
    static const std::map<std::string, std::string> kHelp = {
        {"fig1", "P_D2D versus the biasing factor T_d for several p_L,c"},
        {"fig2", "outage versus threshold for antenna variants (--grid antenna=M_db/theta_deg,...)"},
        {"fig3", "outage versus threshold for overlay (beta=0) and underlay (beta=1)"},
        {"fig4", "outage versus threshold for beam-steering error std-devs in degrees"}};
    figs[fig] = app.add_subcommand(fig, kHelp.at(fig));
    add_common(figs[fig], flags, true);
  }
  CLI::App* validate_cmd = app.add_subcommand("validate", "analytic versus Monte Carlo cross-check");
  add_common(validate_cmd, flags, true);
  CLI::App* pd2d_cmd = app.add_subcommand("pd2d", "probability of D2D mode for one scenario");
  add_common(pd2d_cmd, flags, false);
  CLI::App* outage_cmd = app.add_subcommand("outage", "outage probability on a Gamma_db grid (CSV to stdout)");
  add_common(outage_cmd, flags, false);
  std::string mode = "both";
  double sigma_be_deg = 0.0;
  outage_cmd->add_option("--mode", mode, "cellular, d2d or both")
      ->check(CLI::IsMember({"cellular", "d2d", "both"}))
      ->capture_default_str();
  outage_cmd->add_option("--sigma-be-deg", sigma_be_deg, "beam-steering error std-dev (degrees)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    for (const auto& [name, cmd] : figs) {
      if (cmd->parsed()) return run_figure(name, flags);
    }
    if (validate_cmd->parsed()) return run_validate_cmd(flags);
    if (pd2d_cmd->parsed()) return run_pd2d_cmd(flags);
    if (outage_cmd->parsed()) return run_outage_cmd(flags, mode, sigma_be_deg);
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const ScenarioError& e) {
    std::cerr << "scenario error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const ValidationError& e) {
    std::cerr << "invalid parameters: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitValidation;
  }
  return kExitUsage;
}
