#pragma once

#include <optional>
#include <string>
#include <string_view>

#include "ionlattice/constants.hpp"

namespace ionlattice {

enum class NoisePreset { kRoomTemperature, kCryogenic, kCustom };
std::string_view to_string(NoisePreset p);
NoisePreset parse_noise_preset(std::string_view name);

// Electric-field noise S_E(omega) = xi * r^-x / omega.
struct NoiseModel {
  double xi = 0.0;       // SI, units fixed by the exponent (V^2 m^(x-2) for S_E in V^2 m^-2 Hz^-1)
  double exponent = 4.0;
  NoisePreset preset = NoisePreset::kCustom;

  void validate() const;
  double spectral_density(double ion_height, double omega) const;

  // Cryogenic value calibrated once against the 3x3 case study and frozen.
  static constexpr double kCryogenicXi = 2.2857316e-23;
  static constexpr double kRoomTemperatureXi = 1e3 * kCryogenicXi;
  static NoiseModel room_temperature();
  static NoiseModel cryogenic();
  static NoiseModel from_preset(NoisePreset preset, double custom_xi = 0.0, double exponent = 4.0);
};

struct Coupling {
  double beta = 0.0;
  double rate = 0.0;  // J, 1/s
  std::optional<double> interaction_time;  // 1/J, absent when F = 0
  bool short_range = false;  // beta < 1
};

// beta = e^2 / (2 pi eps0 m w^2 A^3),  J = beta F^2 / (m w^2 hbar)
Coupling coupling_and_beta(double force, double mass, double omega, double separation,
                           double charge = constants::kElementaryCharge);

struct Heating {
  double noise_density = 0.0;  // S_E
  double heating_time = 0.0;   // 4 m w hbar / (e^2 S_E)
  double ksim = 0.0;
  std::optional<double> interaction_time;
};

Heating heating_and_ksim(double mass, double omega, double separation, double ion_height,
                         double force, const NoiseModel& noise,
                         double charge = constants::kElementaryCharge);

// K_sim of a fixed geometry written with eta_geo and alpha instead of omega.
double ksim_from_geometry(double force, double mass, double ion_height, double separation,
                          double alpha, double eta_geo, const NoiseModel& noise,
                          double charge = constants::kElementaryCharge);

// Closed forms on the optimal ridge, where r = k_r alpha and A = k_A alpha.
struct OptimizedForms {
  double omega = 0.0;
  double ksim = 0.0;
  double interaction_time = 0.0;  // infinite when F = 0
};

OptimizedForms optimized_closed_forms(double k_r, double k_A, double alpha, double mass,
                                      double eta_geo, double force, const NoiseModel& noise,
                                      double charge = constants::kElementaryCharge);

double ridge_omega(double k_r, double alpha, double mass, double eta_geo,
                   double charge = constants::kElementaryCharge);

// How the detuning and fine-structure splitting enter the laser formulas.
// kCyclic uses Delta/2pi (Hz) next to the angular linewidth; kAngular uses rad/s throughout.
enum class DetuningConvention { kCyclic, kAngular };
std::string_view to_string(DetuningConvention c);
DetuningConvention parse_detuning_convention(std::string_view name);

// pi h c gamma / (3 lambda^3)
double saturation_intensity(double linewidth_angular, double transition_wavelength);

inline constexpr double kYbLinewidthAngular = 2.0 * constants::kPi * 19.6e6;
inline constexpr double kYbTransitionWavelength = 369.5e-9;

struct LaserForceModel {
  double power = 6.5;                                    // W
  double sheet_width = 25e-6;                            // m
  double detuning = 2.0 * constants::kPi * 33e12;        // rad/s
  double wavelength = 355e-9;                            // m
  double saturation_intensity = 0.0;                     // W/m^2; 0 -> Yb+ value
  double linewidth = kYbLinewidthAngular;                // rad/s
  double fine_structure = 2.0 * constants::kPi * 100e12; // rad/s
  int sites_per_side = 3;
  int observable_sites = 1;
  double mean_phonon = 0.0;
  double initial_phonon = 0.0;
  double heating_rate = 0.0;  // quanta/s
  DetuningConvention convention = DetuningConvention::kCyclic;

  void validate() const;
  double isat() const;
  double detuning_term() const;
  double fine_structure_term() const;
  double sheet_area(double k_A, double alpha) const;
};

// F = 2 pi hbar P gamma^2 / (3 a Delta lambda I_sat)
double laser_force(const LaserForceModel& model, double k_A, double alpha);
// Inverse of laser_force.
double laser_power_for_force(const LaserForceModel& model, double k_A, double alpha, double force);

struct MagneticForceModel {
  double current = 1.0;       // A
  double offset_slope = 98.0; // k_a, m/(V s)
  double angle = constants::kPi / 4.0;  // theta
  double ion_height_slope = 98.0;       // k_r
  int observable_sites = 1;
  double mean_phonon = 0.0;

  void validate() const;
};

struct MagneticForce {
  double gradient = 0.0;     // b along r'
  double gradient_xz = 0.0;  // in-plane component
  double force = 0.0;
};

MagneticForce magnetic_force(const MagneticForceModel& model, double alpha);
double current_for_gradient(double gradient_xz, double alpha, double k_r, double k_a, double angle);
// F = hbar e b / (2 m_e)
double gradient_force(double gradient);

// E0 = F^2 M (n + 1/2) / (2 hbar m w^3)
double sim_error(double force, double mass, double omega, int observable_sites, double mean_phonon);
// Closed form along the optimal ridge with the laser force substituted; increases with alpha.
double sim_error_laser(const LaserForceModel& model, double k_r, double k_A, double eta_geo,
                       double alpha, double mass, double charge = constants::kElementaryCharge);
// Same with the wire-gradient force; decreases with alpha.
double sim_error_mag(const MagneticForceModel& model, double eta_geo, double alpha, double mass,
                     double charge = constants::kElementaryCharge);
// Heating during one interaction: n -> n0 + 1/K_sim.
double sim_error_heating(double force, double mass, double omega, int observable_sites,
                         double initial_phonon, double ksim);

struct SpontaneousEmission {
  double rabi = 0.0;  // single-photon Rabi frequency g
  double rate = 0.0;  // S, 1/s
  double time = 0.0;  // T_S
  std::optional<double> lsim;
};

SpontaneousEmission spontaneous_emission(const LaserForceModel& model, double k_A, double alpha,
                                         std::optional<double> interaction_time = std::nullopt);

// Detuning (same units as fine_structure) minimising the scattering rate at fixed force.
double optimal_detuning(double fine_structure);

// P_D = V^2 C^2 R Omega^2 / 2
double power_dissipation(double voltage, double drive, double capacitance, double resistance);

struct OperatingPoint {
  double voltage = 0.0;
  double drive = 0.0;
  double power = 0.0;
};

// V0 = 2 e eta / (m k_r^2 q), Omega0 = V0 / alpha, and the dissipated power at that point.
OperatingPoint unique_operating_point(double mass, double q, double k_r, double eta_geo, double alpha,
                                      double capacitance, double resistance,
                                      double charge = constants::kElementaryCharge);

struct MetricsReport {
  double force = 0.0;
  double omega = 0.0;
  double separation = 0.0;
  double ion_height = 0.0;
  double coupling_rate = 0.0;
  double beta = 0.0;
  std::optional<double> interaction_time;
  double heating_time = 0.0;
  double ksim = 0.0;
  std::optional<double> scattering_rate;
  std::optional<double> scattering_time;
  std::optional<double> lsim;
  double sim_error = 0.0;
  std::optional<double> power_dissipation;
  std::string noise_label;
};

// Builds a report from one site's r, omega and A; identities K = T_heat / T_J and
// L = T_S / T_J hold as stored.
MetricsReport make_report(double force, double mass, double omega, double separation,
                          double ion_height, const NoiseModel& noise, int observable_sites,
                          double mean_phonon, std::optional<SpontaneousEmission> scattering = {},
                          double charge = constants::kElementaryCharge);

}  // namespace ionlattice
