#include "ionlattice/config.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

namespace ionlattice {

namespace {

template <typename C, typename F>
void visit_fields(C& c, F&& f) {
  f("ion_label", c.ion_label);
  f("ion_mass_amu", c.ion_mass_amu);
  f("ion_charge_e", c.ion_charge_e);
  f("noise_preset", c.noise_preset);
  f("noise_xi", c.noise_xi);
  f("heating_exponent", c.heating_exponent);
  f("stability_q", c.stability_q);
  f("min_trap_depth_ev", c.min_trap_depth_ev);
  f("min_ion_height_um", c.min_ion_height_um);
  f("alpha_ref_vus", c.alpha_ref_vus);
  f("drive_ref_mhz", c.drive_ref_mhz);
  f("cell_type", c.cell_type);
  f("sites_per_side", c.sites_per_side);
  f("polygon_sides", c.polygon_sides);
  f("separation_um", c.separation_um);
  f("radius_um", c.radius_um);
  f("orientation_deg", c.orientation_deg);
  f("optimize_g", c.optimize_g);
  f("g_over_L", c.g_over_L);
  f("g_min", c.g_min);
  f("g_max", c.g_max);
  f("g_step", c.g_step);
  f("g_tolerance", c.g_tolerance);
  f("homogeneity_slices", c.homogeneity_slices);
  f("sides_list", c.sides_list);
  f("sides_reference", c.sides_reference);
  f("sides_separation_um", c.sides_separation_um);
  f("sides_radius_um", c.sides_radius_um);
  f("sides_metric", c.sides_metric);
  f("sides_reoptimize_g", c.sides_reoptimize_g);
  f("scan_a_min_um", c.scan_a_min_um);
  f("scan_a_max_um", c.scan_a_max_um);
  f("scan_r_min_um", c.scan_r_min_um);
  f("scan_r_max_um", c.scan_r_max_um);
  f("resolution_um", c.resolution_um);
  f("alpha_bin_vus", c.alpha_bin_vus);
  f("scaling_sites_per_side", c.scaling_sites_per_side);
  f("scaling_masses_amu", c.scaling_masses_amu);
  f("scaling_mass_sites_per_side", c.scaling_mass_sites_per_side);
  f("scaling_resolution_um", c.scaling_resolution_um);
  f("laser_power_w", c.laser_power_w);
  f("max_laser_power_w", c.max_laser_power_w);
  f("sheet_width_um", c.sheet_width_um);
  f("detuning_thz", c.detuning_thz);
  f("fine_structure_thz", c.fine_structure_thz);
  f("wavelength_nm", c.wavelength_nm);
  f("linewidth_mhz", c.linewidth_mhz);
  f("saturation_intensity_w_m2", c.saturation_intensity_w_m2);
  f("detuning_convention", c.detuning_convention);
  f("observable_sites", c.observable_sites);
  f("mean_phonon", c.mean_phonon);
  f("max_sim_error", c.max_sim_error);
  f("gradient_t_per_m", c.gradient_t_per_m);
  f("wire_angle_deg", c.wire_angle_deg);
  f("wire_offset_ratio", c.wire_offset_ratio);
  f("max_wire_current_a", c.max_wire_current_a);
  f("chip_capacitance_pf", c.chip_capacitance_pf);
  f("chip_resistance_ohm", c.chip_resistance_ohm);
  f("sweep_alpha_min_vus", c.sweep_alpha_min_vus);
  f("sweep_alpha_max_vus", c.sweep_alpha_max_vus);
  f("sweep_alpha_points", c.sweep_alpha_points);
  f("sweep_power_min_w", c.sweep_power_min_w);
  f("sweep_power_max_w", c.sweep_power_max_w);
  f("sweep_power_points", c.sweep_power_points);
  f("sweep_gradient_min_t_per_m", c.sweep_gradient_min_t_per_m);
  f("sweep_gradient_max_t_per_m", c.sweep_gradient_max_t_per_m);
  f("sweep_gradient_points", c.sweep_gradient_points);
  f("fieldmap_plane", c.fieldmap_plane);
  f("fieldmap_extent_um", c.fieldmap_extent_um);
  f("fieldmap_height_um", c.fieldmap_height_um);
  f("fieldmap_points", c.fieldmap_points);
  f("rf_voltage_v", c.rf_voltage_v);
  f("drive_mhz", c.drive_mhz);
  f("seed", c.seed);
  f("threads", c.threads);
  f("output_dir", c.output_dir);
}

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  std::string s(buf);
  // Keep a float marker so the value re-parses as a float in TOML readers.
  if (s.find_first_of(".eEn") == std::string::npos) s += ".0";
  return s;
}

std::string format_value(const std::string& v) {
  std::string out = "\"";
  for (char c : v) {
    if (c == '"' || c == '\\') out += '\\';
    out += c;
  }
  return out + "\"";
}
std::string format_value(double v) { return format_double(v); }
std::string format_value(int v) { return std::to_string(v); }
std::string format_value(unsigned v) { return std::to_string(v); }
std::string format_value(std::uint64_t v) { return std::to_string(v); }
std::string format_value(bool v) { return v ? "true" : "false"; }
template <typename T>
std::string format_value(const std::vector<T>& v) {
  std::string out = "[";
  for (std::size_t k = 0; k < v.size(); ++k) out += (k ? ", " : "") + format_value(v[k]);
  return out + "]";
}

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

[[noreturn]] void bad(const std::string& key, const std::string& value, const char* want) {
  throw ConfigError("config key '" + key + "': cannot read '" + value + "' as " + want);
}

void parse_into(const std::string& key, const std::string& v, std::string& out) {
  if (v.size() < 2 || v.front() != '"' || v.back() != '"') bad(key, v, "a quoted string");
  out.clear();
  for (std::size_t k = 1; k + 1 < v.size(); ++k) {
    if (v[k] == '\\' && k + 2 < v.size()) ++k;
    out += v[k];
  }
}

void parse_into(const std::string& key, const std::string& v, double& out) {
  std::string s;
  for (char c : v)
    if (c != '_') s += c;
  char* end = nullptr;
  out = std::strtod(s.c_str(), &end);
  if (s.empty() || end != s.c_str() + s.size() || !std::isfinite(out)) bad(key, v, "a finite number");
}

template <typename I>
void parse_integer(const std::string& key, const std::string& v, I& out) {
  const auto* b = v.data();
  const auto* e = v.data() + v.size();
  const auto r = std::from_chars(b, e, out);
  if (v.empty() || r.ec != std::errc() || r.ptr != e) bad(key, v, "an integer");
}
void parse_into(const std::string& key, const std::string& v, int& out) { parse_integer(key, v, out); }
void parse_into(const std::string& key, const std::string& v, unsigned& out) { parse_integer(key, v, out); }
void parse_into(const std::string& key, const std::string& v, std::uint64_t& out) { parse_integer(key, v, out); }

void parse_into(const std::string& key, const std::string& v, bool& out) {
  if (v == "true") out = true;
  else if (v == "false") out = false;
  else bad(key, v, "true or false");
}

template <typename T>
void parse_into(const std::string& key, const std::string& v, std::vector<T>& out) {
  if (v.size() < 2 || v.front() != '[' || v.back() != ']') bad(key, v, "an array");
  out.clear();
  const std::string body = trim(std::string_view(v).substr(1, v.size() - 2));
  if (body.empty()) return;
  std::stringstream ss(body);
  std::string item;
  while (std::getline(ss, item, ',')) {
    T x{};
    const std::string t = trim(item);
    if (t.empty()) continue;  // trailing comma
    parse_into(key, t, x);
    out.push_back(x);
  }
}

std::string strip_comment(const std::string& line) {
  bool quoted = false;
  for (std::size_t k = 0; k < line.size(); ++k) {
    if (line[k] == '"' && (k == 0 || line[k - 1] != '\\')) quoted = !quoted;
    if (line[k] == '#' && !quoted) return line.substr(0, k);
  }
  return line;
}

}  // namespace

std::uint64_t fnv1a64(std::string_view data) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : data) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

std::vector<std::pair<std::string, std::string>> RunConfig::entries() const {
  std::vector<std::pair<std::string, std::string>> out;
  visit_fields(*this, [&](const char* key, const auto& value) { out.emplace_back(key, format_value(value)); });
  return out;
}

void RunConfig::set(const std::string& key, const std::string& value) {
  bool found = false;
  visit_fields(*this, [&](const char* k, auto& field) {
    if (key == k) {
      parse_into(key, trim(value), field);
      found = true;
    }
  });
  if (!found) throw ConfigError("unknown config key '" + key + "'");
}

RunConfig RunConfig::parse(const std::string& text) {
  RunConfig c;
  std::istringstream in(text);
  std::string line;
  std::set<std::string> seen;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string t = trim(strip_comment(line));
    if (t.empty()) continue;
    if (t.front() == '[') throw ConfigError("line " + std::to_string(lineno) + ": tables are not supported");
    const auto eq = t.find('=');
    if (eq == std::string::npos) throw ConfigError("line " + std::to_string(lineno) + ": expected key = value");
    const std::string key = trim(std::string_view(t).substr(0, eq));
    if (!seen.insert(key).second) throw ConfigError("duplicate config key '" + key + "'");
    c.set(key, trim(std::string_view(t).substr(eq + 1)));
  }
  c.validate();
  return c;
}

RunConfig RunConfig::load(const std::filesystem::path& path) {
  std::ifstream f(path);
  if (!f) throw ConfigError("cannot open config file " + path.string());
  std::stringstream ss;
  ss << f.rdbuf();
  return parse(ss.str());
}

std::string RunConfig::to_text() const {
  std::string out;
  for (const auto& [k, v] : entries()) out += k + " = " + v + "\n";
  return out;
}

std::string RunConfig::hash() const { return hex64(fnv1a64(to_text())); }

void RunConfig::validate() const {
  auto need = [](bool ok, const std::string& what) {
    if (!ok) throw ConfigError(what);
  };
  need(ion_mass_amu > 0, "ion_mass_amu must be positive");
  need(ion_charge_e > 0, "ion_charge_e must be positive");
  try {
    (void)parse_noise_preset(noise_preset);
    (void)parse_cell_type(cell_type);
    (void)parse_detuning_convention(detuning_convention);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  need(noise_preset != "custom" || noise_xi > 0, "custom noise preset needs noise_xi > 0");
  need(heating_exponent >= 2 && heating_exponent <= 4, "heating_exponent must lie in [2, 4]");
  need(stability_q > 0 && stability_q < kMaxStableQ, "stability_q must lie in (0, 0.9)");
  need(min_trap_depth_ev > 0, "min_trap_depth_ev must be positive");
  need(min_ion_height_um > 0, "min_ion_height_um must be positive");
  need(alpha_ref_vus > 0 && drive_ref_mhz > 0, "reference alpha and drive must be positive");
  need(sites_per_side >= 1 && polygon_sides >= 3, "lattice needs sites_per_side >= 1 and polygon_sides >= 3");
  need(separation_um > 0 && radius_um > 0 && 3 * radius_um < separation_um, "lattice needs 0 < 3 R < A");
  need(g_over_L >= 0, "g_over_L must be non-negative");
  need(g_min > 0 && g_max > g_min && g_max <= 1.5 + 1e-12 && g_step > 0 && g_tolerance > 0,
       "g/L search range must satisfy 0 < g_min < g_max <= 1.5");
  need(!sides_list.empty(), "sides_list must not be empty");
  for (int n : sides_list) need(n >= 3, "sides_list entries must be >= 3");
  need(sides_reference >= 3, "sides_reference must be >= 3");
  need(sides_separation_um > 0 && sides_radius_um > 0 && 3 * sides_radius_um < sides_separation_um,
       "side sweep geometry needs 0 < 3 R < A");
  need(sides_metric == "fixed-drive" || sides_metric == "minimum-depth",
       "sides_metric must be fixed-drive or minimum-depth");
  need(scan_a_min_um > 0 && scan_r_min_um > 0, "scan ranges must be positive");
  need(resolution_um > 0 && scaling_resolution_um > 0, "resolutions must be positive");
  need(alpha_bin_vus > 0, "alpha_bin_vus must be positive");
  for (int m : scaling_sites_per_side) need(m >= 1, "scaling_sites_per_side entries must be >= 1");
  for (double m : scaling_masses_amu) need(m > 0, "scaling_masses_amu entries must be positive");
  need(scaling_mass_sites_per_side >= 1, "scaling_mass_sites_per_side must be >= 1");
  need(laser_power_w > 0 && sheet_width_um > 0 && wavelength_nm > 0 && linewidth_mhz > 0, "laser inputs must be positive");
  need(detuning_thz > 0 && detuning_thz < fine_structure_thz, "detuning must lie in (0, fine-structure splitting)");
  need(saturation_intensity_w_m2 >= 0 && max_laser_power_w >= 0 && max_wire_current_a >= 0,
       "limits must be non-negative");
  need(observable_sites >= 1 && mean_phonon >= 0, "observable_sites >= 1 and mean_phonon >= 0 required");
  need(max_sim_error > 0, "max_sim_error must be positive");
  need(gradient_t_per_m > 0 && wire_offset_ratio >= 0, "gradient must be positive");
  need(wire_angle_deg >= 0 && wire_angle_deg < 90, "wire_angle_deg must lie in [0, 90)");
  need(chip_capacitance_pf > 0 && chip_resistance_ohm > 0, "chip capacitance and resistance must be positive");
  need(sweep_alpha_min_vus > 0 && sweep_alpha_max_vus >= sweep_alpha_min_vus && sweep_alpha_points >= 1,
       "alpha sweep range invalid");
  need(sweep_power_min_w > 0 && sweep_power_max_w >= sweep_power_min_w && sweep_power_points >= 1,
       "power sweep range invalid");
  need(sweep_gradient_min_t_per_m > 0 && sweep_gradient_max_t_per_m >= sweep_gradient_min_t_per_m &&
           sweep_gradient_points >= 1,
       "gradient sweep range invalid");
  need(fieldmap_plane == "xy" || fieldmap_plane == "xz", "fieldmap_plane must be xy or xz");
  need(fieldmap_points >= 2 && fieldmap_extent_um >= 0 && fieldmap_height_um >= 0, "field map grid invalid");
  need(rf_voltage_v > 0 && drive_mhz > 0, "rf_voltage_v and drive_mhz must be positive");
  need(!output_dir.empty(), "output_dir must not be empty");
}

double RunConfig::mass() const { return ion_mass_amu * constants::kAtomicMassUnit; }
double RunConfig::charge() const { return ion_charge_e * constants::kElementaryCharge; }

NoiseModel RunConfig::noise() const {
  return NoiseModel::from_preset(parse_noise_preset(noise_preset), noise_xi, heating_exponent);
}

LatticeSpec RunConfig::lattice() const {
  LatticeSpec s;
  s.cell_type = parse_cell_type(cell_type);
  s.sites_per_side = sites_per_side;
  s.polygon_sides = polygon_sides;
  s.separation = separation_um * 1e-6;
  s.radius = radius_um * 1e-6;
  s.orientation = orientation_deg * constants::kPi / 180.0;
  s.edge_gap = g_over_L * lattice_side_length(s.sites_per_side, s.separation, s.radius);
  return s;
}

LaserForceModel RunConfig::laser() const {
  LaserForceModel m;
  const double two_pi = 2.0 * constants::kPi;
  m.power = laser_power_w;
  m.sheet_width = sheet_width_um * 1e-6;
  m.detuning = two_pi * detuning_thz * 1e12;
  m.fine_structure = two_pi * fine_structure_thz * 1e12;
  m.wavelength = wavelength_nm * 1e-9;
  m.linewidth = two_pi * linewidth_mhz * 1e6;
  m.saturation_intensity =
      saturation_intensity_w_m2 > 0 ? saturation_intensity_w_m2 : saturation_intensity(m.linewidth, kYbTransitionWavelength);
  m.sites_per_side = sites_per_side;
  m.observable_sites = observable_sites;
  m.mean_phonon = mean_phonon;
  m.convention = parse_detuning_convention(detuning_convention);
  return m;
}

GSearchOptions RunConfig::g_search() const {
  GSearchOptions g;
  g.lower = g_min;
  g.upper = g_max;
  g.step = g_step;
  g.tolerance = g_tolerance;
  g.exponent = heating_exponent;
  g.threads = threads;
  return g;
}

ScanOptions RunConfig::scan(double resolution_m) const {
  ScanOptions o;
  o.a_min = scan_a_min_um * 1e-6;
  o.a_max = scan_a_max_um * 1e-6;
  o.r_min = scan_r_min_um * 1e-6;
  o.r_max = scan_r_max_um * 1e-6;
  o.resolution = resolution_m;
  o.min_depth = constants::ev_to_joules(min_trap_depth_ev);
  o.alpha_ref = alpha_ref_vus * 1e-6;
  o.drive_ref = 2.0 * constants::kPi * drive_ref_mhz * 1e6;
  o.g_over_L = g_over_L;
  o.mass = mass();
  o.charge = charge();
  o.noise = noise();
  o.threads = threads;
  return o;
}

PseudoContext RunConfig::reference_context() const {
  PseudoContext ctx;
  ctx.charge = charge();
  ctx.mass = mass();
  ctx.drive = 2.0 * constants::kPi * drive_ref_mhz * 1e6;
  ctx.rf_amplitude = alpha_ref_vus * 1e-6 * ctx.drive;
  return ctx;
}

}  // namespace ionlattice
