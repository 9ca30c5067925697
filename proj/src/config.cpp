// Scenario file parsing, validation and serialization.

#include "mmd2d/config.h"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <map>
#include <set>
#include <sstream>

namespace mmd2d {

double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }
double linear_to_db(double linear) { return 10.0 * std::log10(linear); }
double dbm_to_watts(double dbm) { return db_to_linear(dbm) * 1e-3; }
double degrees_to_radians(double deg) { return deg * std::numbers::pi / 180.0; }
double radians_to_degrees(double rad) { return rad * 180.0 / std::numbers::pi; }

NetworkParams default_params() { return NetworkParams{}; }

namespace {

void require(bool ok, const std::string& message) {
  if (!ok) throw ValidationError(message);
}

bool is_probability(double p) { return p >= 0.0 && p <= 1.0; }

void validate_antenna(const SectoredAntenna& a, const std::string& name) {
  require(a.side_gain > 0.0 && std::isfinite(a.side_gain), name + " side-lobe gain must be positive");
  require(a.main_gain >= a.side_gain && std::isfinite(a.main_gain),
          name + " main-lobe gain must be >= side-lobe gain");
  require(a.beamwidth > 0.0 && a.beamwidth < 2.0 * std::numbers::pi,
          name + " beamwidth must lie in (0, 2*pi)");
}

void validate_ball(const LosBall& b, const std::string& name) {
  require(is_probability(b.p_los), "p_L_" + name + " must lie in [0,1]");
  require(b.radius > 0.0 && std::isfinite(b.radius), "R_B_" + name + " must be positive");
}

}  // namespace

void validate(const NetworkParams& p) {
  auto positive = [](double x) { return x > 0.0 && std::isfinite(x); };
  require(positive(p.bs_density), "lambda_B must be positive");
  require(positive(p.ue_density), "lambda_U must be positive");
  require(is_probability(p.cellular_fraction), "q must lie in [0,1]");
  require(p.d2d_bias >= 0.0 && !std::isnan(p.d2d_bias), "T_d must be >= 0 (or inf)");
  require(is_probability(p.partition), "delta must lie in [0,1]");
  require(positive(p.cellular_power), "P_c must be positive");
  require(positive(p.d2d_power), "P_d must be positive");
  require(positive(p.noise_power), "sigma2 must be positive");
  require(positive(p.threshold), "Gamma must be positive");
  for (double a : {p.alpha.los_cellular, p.alpha.nlos_cellular, p.alpha.los_d2d, p.alpha.nlos_d2d}) {
    require(a >= 2.0 && std::isfinite(a), "path-loss exponents must be >= 2");
  }
  require(p.nakagami.los >= 1, "N_L must be a positive integer");
  require(p.nakagami.nlos >= 1, "N_N must be a positive integer");
  validate_antenna(p.antenna_bs, "BS");
  validate_antenna(p.antenna_ue, "UE");
  validate_ball(p.los_cellular, "c");
  validate_ball(p.los_d2d, "d");
  require(p.los_d2d.p_los == 1.0, "p_L_d must be 1 (D2D links are LOS inside the ball)");
}

DerivedDensities derived_densities(const NetworkParams& params, double p_d2d) {
  if (!(p_d2d >= 0.0 && p_d2d <= 1.0)) throw ValidationError("p_d2d must lie in [0,1]");
  const double q = params.cellular_fraction;
  const double lu = params.ue_density;
  DerivedDensities d;
  d.d2d = (1.0 - q) * lu * p_d2d;
  d.cellular = q * lu + (1.0 - q) * lu * (1.0 - p_d2d);
  return d;
}

namespace {

// One scenario key. Several keys may spell the same quantity in different
// units; at most one of them may appear in a file.
struct KeySpec {
  const char* key;
  const char* quantity;
  std::function<void(NetworkParams&, double)> set;
};

double parse_number(std::string_view text, int line) {
  std::string s(text);
  if (s == "inf" || s == "+inf" || s == "infinity") return std::numeric_limits<double>::infinity();
  double value = 0.0;
  const char* first = s.data();
  const char* last = s.data() + s.size();
  auto [ptr, ec] = std::from_chars(first, last, value);
  if (ec != std::errc() || ptr != last) throw ScenarioError("not a number: '" + s + "'", line);
  return value;
}

int to_int(double v, const char* key, int line) {
  if (!std::isfinite(v) || v != std::floor(v) || std::abs(v) > 1e6) {
    throw ScenarioError(std::string(key) + " must be an integer", line);
  }
  return static_cast<int>(v);
}

const std::vector<KeySpec>& key_table() {
  static const std::vector<KeySpec> table = [] {
    std::vector<KeySpec> t;
    auto add = [&t](const char* key, const char* quantity, std::function<void(NetworkParams&, double)> f) {
      t.push_back({key, quantity, std::move(f)});
    };
    add("lambda_B_per_m2", "lambda_B", [](NetworkParams& p, double v) { p.bs_density = v; });
    add("lambda_U_per_m2", "lambda_U", [](NetworkParams& p, double v) { p.ue_density = v; });
    add("q", "q", [](NetworkParams& p, double v) { p.cellular_fraction = v; });
    add("T_d", "T_d", [](NetworkParams& p, double v) { p.d2d_bias = v; });
    add("beta", "beta", [](NetworkParams& p, double v) {
      if (v != 0.0 && v != 1.0) throw ScenarioError("beta must be 0 or 1");
      p.sharing = v == 1.0 ? SpectrumSharing::kUnderlay : SpectrumSharing::kOverlay;
    });
    add("delta", "delta", [](NetworkParams& p, double v) { p.partition = v; });
    add("P_c_mw", "P_c", [](NetworkParams& p, double v) { p.cellular_power = v * 1e-3; });
    add("P_c_w", "P_c", [](NetworkParams& p, double v) { p.cellular_power = v; });
    add("P_d_mw", "P_d", [](NetworkParams& p, double v) { p.d2d_power = v * 1e-3; });
    add("P_d_w", "P_d", [](NetworkParams& p, double v) { p.d2d_power = v; });
    add("sigma2_dbm", "sigma2", [](NetworkParams& p, double v) { p.noise_power = dbm_to_watts(v); });
    add("sigma2_w", "sigma2", [](NetworkParams& p, double v) { p.noise_power = v; });
    add("Gamma_db", "Gamma", [](NetworkParams& p, double v) { p.threshold = db_to_linear(v); });
    add("Gamma_lin", "Gamma", [](NetworkParams& p, double v) { p.threshold = v; });
    add("alpha_L_c", "alpha_L_c", [](NetworkParams& p, double v) { p.alpha.los_cellular = v; });
    add("alpha_N_c", "alpha_N_c", [](NetworkParams& p, double v) { p.alpha.nlos_cellular = v; });
    add("alpha_L_d", "alpha_L_d", [](NetworkParams& p, double v) { p.alpha.los_d2d = v; });
    add("alpha_N_d", "alpha_N_d", [](NetworkParams& p, double v) { p.alpha.nlos_d2d = v; });
    add("N_L", "N_L", [](NetworkParams& p, double v) { p.nakagami.los = to_int(v, "N_L", 0); });
    add("N_N", "N_N", [](NetworkParams& p, double v) { p.nakagami.nlos = to_int(v, "N_N", 0); });
    add("M_bs_db", "M_bs", [](NetworkParams& p, double v) { p.antenna_bs.main_gain = db_to_linear(v); });
    add("M_bs_lin", "M_bs", [](NetworkParams& p, double v) { p.antenna_bs.main_gain = v; });
    add("m_bs_db", "m_bs", [](NetworkParams& p, double v) { p.antenna_bs.side_gain = db_to_linear(v); });
    add("m_bs_lin", "m_bs", [](NetworkParams& p, double v) { p.antenna_bs.side_gain = v; });
    add("theta_bs_deg", "theta_bs", [](NetworkParams& p, double v) { p.antenna_bs.beamwidth = degrees_to_radians(v); });
    add("theta_bs_rad", "theta_bs", [](NetworkParams& p, double v) { p.antenna_bs.beamwidth = v; });
    add("M_ue_db", "M_ue", [](NetworkParams& p, double v) { p.antenna_ue.main_gain = db_to_linear(v); });
    add("M_ue_lin", "M_ue", [](NetworkParams& p, double v) { p.antenna_ue.main_gain = v; });
    add("m_ue_db", "m_ue", [](NetworkParams& p, double v) { p.antenna_ue.side_gain = db_to_linear(v); });
    add("m_ue_lin", "m_ue", [](NetworkParams& p, double v) { p.antenna_ue.side_gain = v; });
    add("theta_ue_deg", "theta_ue", [](NetworkParams& p, double v) { p.antenna_ue.beamwidth = degrees_to_radians(v); });
    add("theta_ue_rad", "theta_ue", [](NetworkParams& p, double v) { p.antenna_ue.beamwidth = v; });
    add("p_L_c", "p_L_c", [](NetworkParams& p, double v) { p.los_cellular.p_los = v; });
    add("R_B_c_m", "R_B_c", [](NetworkParams& p, double v) { p.los_cellular.radius = v; });
    add("p_L_d", "p_L_d", [](NetworkParams& p, double v) { p.los_d2d.p_los = v; });
    add("R_B_d_m", "R_B_d", [](NetworkParams& p, double v) { p.los_d2d.radius = v; });
    return t;
  }();
  return table;
}

std::string_view trim(std::string_view s) {
  const auto ws = " \t\r\n";
  const auto b = s.find_first_not_of(ws);
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(ws);
  return s.substr(b, e - b + 1);
}

}  // namespace

NetworkParams parse_scenario(std::string_view text, std::vector<std::string>* warnings) {
  NetworkParams params = default_params();
  std::map<std::string, std::string> seen;  // quantity -> key that set it
  std::istringstream in{std::string(text)};
  std::string raw;
  int line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    std::string_view line = raw;
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) throw ScenarioError("expected 'key = value'", line_no);
    const std::string key(trim(line.substr(0, eq)));
    const std::string_view value_text = trim(line.substr(eq + 1));
    if (key.empty()) throw ScenarioError("missing key", line_no);
    if (value_text.empty()) throw ScenarioError("missing value for '" + key + "'", line_no);

    const auto& table = key_table();
    const auto it = std::find_if(table.begin(), table.end(), [&](const KeySpec& k) { return key == k.key; });
    if (it == table.end()) throw ScenarioError("unknown key '" + key + "'", line_no);
    if (const auto prev = seen.find(it->quantity); prev != seen.end()) {
      throw ScenarioError("'" + key + "' sets " + it->quantity + " already set by '" + prev->second + "'",
                          line_no);
    }
    seen.emplace(it->quantity, key);
    const double value = parse_number(value_text, line_no);
    try {
      it->set(params, value);
    } catch (const ScenarioError& e) {
      throw ScenarioError(e.what(), line_no);
    }
  }
  if (!seen.contains("p_L_d") && warnings != nullptr) {
    warnings->push_back("p_L_d not given; D2D links are LOS inside the ball, using p_L_d = 1");
  }
  validate(params);
  return params;
}

NetworkParams load_scenario(const std::filesystem::path& path, std::vector<std::string>* warnings) {
  std::ifstream in(path);
  if (!in) throw ScenarioError("cannot open scenario file '" + path.string() + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_scenario(buf.str(), warnings);
}

std::string serialize_scenario(const NetworkParams& p) {
  std::string out;
  auto put = [&out](const char* key, double v) {
    char buf[64];
    if (std::isinf(v)) {
      std::snprintf(buf, sizeof buf, "inf");
    } else {
      std::snprintf(buf, sizeof buf, "%.17g", v);
    }
    out += key;
    out += " = ";
    out += buf;
    out += '\n';
  };
  out += "# mmd2d scenario (linear units)\n";
  put("lambda_B_per_m2", p.bs_density);
  put("lambda_U_per_m2", p.ue_density);
  put("q", p.cellular_fraction);
  put("T_d", p.d2d_bias);
  put("beta", p.beta());
  put("delta", p.partition);
  put("P_c_w", p.cellular_power);
  put("P_d_w", p.d2d_power);
  put("sigma2_w", p.noise_power);
  put("Gamma_lin", p.threshold);
  put("alpha_L_c", p.alpha.los_cellular);
  put("alpha_N_c", p.alpha.nlos_cellular);
  put("alpha_L_d", p.alpha.los_d2d);
  put("alpha_N_d", p.alpha.nlos_d2d);
  put("N_L", p.nakagami.los);
  put("N_N", p.nakagami.nlos);
  put("M_bs_lin", p.antenna_bs.main_gain);
  put("m_bs_lin", p.antenna_bs.side_gain);
  put("theta_bs_rad", p.antenna_bs.beamwidth);
  put("M_ue_lin", p.antenna_ue.main_gain);
  put("m_ue_lin", p.antenna_ue.side_gain);
  put("theta_ue_rad", p.antenna_ue.beamwidth);
  put("p_L_c", p.los_cellular.p_los);
  put("R_B_c_m", p.los_cellular.radius);
  put("p_L_d", p.los_d2d.p_los);
  put("R_B_d_m", p.los_d2d.radius);
  return out;
}

}  // namespace mmd2d
