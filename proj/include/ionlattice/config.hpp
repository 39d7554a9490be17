#pragma once

#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "ionlattice/geometry.hpp"
#include "ionlattice/metrics.hpp"
#include "ionlattice/optimizer.hpp"

namespace ionlattice {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Flat key = value file (TOML subset: numbers, booleans, "strings", [arrays]).
// Units are in the key names; everything is converted to SI by the accessors.
struct RunConfig {
  // species
  std::string ion_label = "171Yb+";
  double ion_mass_amu = constants::kYb171IonMassAmu;
  double ion_charge_e = 1.0;

  // noise
  std::string noise_preset = "cryogenic";
  double noise_xi = 0.0;  // only for the custom preset
  double heating_exponent = 4.0;

  // drive constraints
  double stability_q = 0.5;
  double min_trap_depth_ev = 0.1;
  double min_ion_height_um = 30.0;
  double alpha_ref_vus = 1.0;
  double drive_ref_mhz = 10.0;

  // lattice template (homogeneity stage and field maps)
  std::string cell_type = "square";
  int sites_per_side = 3;
  int polygon_sides = 25;
  double separation_um = 174.0;
  double radius_um = 45.0;
  double orientation_deg = 0.0;
  bool optimize_g = true;
  double g_over_L = 1.0;  // used when optimize_g is false

  // homogeneity search
  double g_min = 0.025;
  double g_max = 1.5;
  double g_step = 0.025;
  double g_tolerance = 1e-3;
  std::vector<double> homogeneity_slices{0.1, 0.2, 0.5, 1.0};

  // polygon side sweep
  std::vector<int> sides_list{3, 4, 5, 6, 8, 10, 12, 16, 20, 25, 30, 40, 60, 80, 100};
  int sides_reference = 100;
  double sides_separation_um = 52.0;
  double sides_radius_um = 14.0;
  std::string sides_metric = "fixed-drive";
  bool sides_reoptimize_g = false;  // false: g/L held at the polygon_sides optimum

  // (A, R) scan
  double scan_a_min_um = 30.0;
  double scan_a_max_um = 100.0;
  double scan_r_min_um = 4.0;
  double scan_r_max_um = 40.0;
  double resolution_um = 2.0;
  double alpha_bin_vus = 0.02;

  // scaling studies
  std::vector<int> scaling_sites_per_side{2, 3, 4, 5};
  std::vector<double> scaling_masses_amu{9.0121831, 23.985041, 39.962591, 87.905612, 137.905247, 170.93578};
  int scaling_mass_sites_per_side = 3;
  double scaling_resolution_um = 2.0;

  // laser force
  double laser_power_w = 6.5;
  double max_laser_power_w = 0.0;  // 0 = unlimited
  double sheet_width_um = 25.0;
  double detuning_thz = 33.0;
  double fine_structure_thz = 100.0;
  double wavelength_nm = 355.0;
  double linewidth_mhz = 19.6;
  double saturation_intensity_w_m2 = 0.0;  // 0 = from linewidth at 369.5 nm
  std::string detuning_convention = "cyclic";
  int observable_sites = 1;
  double mean_phonon = 0.0;
  double max_sim_error = 0.25;

  // magnetic-gradient force
  double gradient_t_per_m = 33000.0;
  double wire_angle_deg = 45.0;
  double wire_offset_ratio = 1.0;  // k_a / k_r
  double max_wire_current_a = 0.0;  // 0 = unlimited

  // chip
  double chip_capacitance_pf = 10.0;
  double chip_resistance_ohm = 1.0;

  // case-study sweeps
  double sweep_alpha_min_vus = 0.1;
  double sweep_alpha_max_vus = 1.0;
  int sweep_alpha_points = 19;
  double sweep_power_min_w = 0.65;
  double sweep_power_max_w = 65.0;
  int sweep_power_points = 21;
  double sweep_gradient_min_t_per_m = 3300.0;
  double sweep_gradient_max_t_per_m = 330000.0;
  int sweep_gradient_points = 21;

  // field map
  std::string fieldmap_plane = "xz";
  double fieldmap_extent_um = 0.0;  // 0 = lattice half-width plus gap
  double fieldmap_height_um = 0.0;  // xy plane height; 0 = central ion height
  int fieldmap_points = 61;
  double rf_voltage_v = 100.0;
  double drive_mhz = 30.0;

  // run
  std::uint64_t seed = 1;
  unsigned threads = 0;
  std::string output_dir = "out";

  void validate() const;

  // Ordered (key, canonical value) pairs; the basis of embedding and hashing.
  std::vector<std::pair<std::string, std::string>> entries() const;
  void set(const std::string& key, const std::string& value);  // throws ConfigError

  static RunConfig parse(const std::string& text);
  static RunConfig load(const std::filesystem::path& path);
  std::string to_text() const;
  std::string hash() const;  // fnv1a64 of to_text()

  // SI accessors
  double mass() const;
  double charge() const;
  NoiseModel noise() const;
  LatticeSpec lattice() const;
  LaserForceModel laser() const;
  GSearchOptions g_search() const;
  ScanOptions scan(double resolution_m) const;
  PseudoContext reference_context() const;
};

std::uint64_t fnv1a64(std::string_view data);
std::string hex64(std::uint64_t v);

}  // namespace ionlattice
