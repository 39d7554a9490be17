#include "ionlattice/metrics.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace ionlattice {

using namespace constants;

namespace {

void require_positive(double v, const char* what) {
  if (!(v > 0.0) || !std::isfinite(v)) throw std::invalid_argument(std::string(what) + " must be positive");
}

void require_nonnegative(double v, const char* what) {
  if (!(v >= 0.0) || !std::isfinite(v)) throw std::invalid_argument(std::string(what) + " must be non-negative");
}

}  // namespace

std::string_view to_string(NoisePreset p) {
  switch (p) {
    case NoisePreset::kRoomTemperature: return "room-temperature";
    case NoisePreset::kCryogenic: return "cryogenic";
    case NoisePreset::kCustom: return "custom";
  }
  return "custom";
}

NoisePreset parse_noise_preset(std::string_view name) {
  if (name == "room-temperature" || name == "room") return NoisePreset::kRoomTemperature;
  if (name == "cryogenic") return NoisePreset::kCryogenic;
  if (name == "custom") return NoisePreset::kCustom;
  throw std::invalid_argument("unknown noise preset: " + std::string(name));
}

void NoiseModel::validate() const {
  require_positive(xi, "noise coefficient");
  if (!(exponent >= 2.0 && exponent <= 4.0))
    throw std::invalid_argument("heating exponent must lie in [2, 4]");
}

double NoiseModel::spectral_density(double ion_height, double omega) const {
  validate();
  return xi * std::pow(ion_height, -exponent) / omega;
}

NoiseModel NoiseModel::room_temperature() { return {kRoomTemperatureXi, 4.0, NoisePreset::kRoomTemperature}; }

NoiseModel NoiseModel::cryogenic() { return {kCryogenicXi, 4.0, NoisePreset::kCryogenic}; }

NoiseModel NoiseModel::from_preset(NoisePreset preset, double custom_xi, double exponent) {
  NoiseModel n;
  n.preset = preset;
  n.exponent = exponent;
  switch (preset) {
    case NoisePreset::kRoomTemperature: n.xi = kRoomTemperatureXi; break;
    case NoisePreset::kCryogenic: n.xi = kCryogenicXi; break;
    case NoisePreset::kCustom: n.xi = custom_xi; break;
  }
  n.validate();
  return n;
}

Coupling coupling_and_beta(double force, double mass, double omega, double separation, double charge) {
  require_nonnegative(force, "force");
  require_positive(mass, "mass");
  require_positive(omega, "secular frequency");
  require_positive(separation, "separation");
  Coupling c;
  const double mw2 = mass * omega * omega;
  c.beta = charge * charge / (2.0 * kPi * kVacuumPermittivity * mw2 * separation * separation * separation);
  c.rate = c.beta * force * force / (mw2 * kHbar);
  if (c.rate > 0.0) c.interaction_time = 1.0 / c.rate;
  c.short_range = c.beta < 1.0;
  return c;
}

Heating heating_and_ksim(double mass, double omega, double separation, double ion_height, double force,
                         const NoiseModel& noise, double charge) {
  require_positive(ion_height, "ion height");
  const Coupling c = coupling_and_beta(force, mass, omega, separation, charge);
  Heating h;
  h.noise_density = noise.spectral_density(ion_height, omega);
  h.heating_time = 4.0 * mass * omega * kHbar / (charge * charge * h.noise_density);
  h.interaction_time = c.interaction_time;
  h.ksim = c.interaction_time ? h.heating_time / *c.interaction_time : 0.0;
  return h;
}

double ksim_from_geometry(double force, double mass, double ion_height, double separation, double alpha,
                          double eta_geo, const NoiseModel& noise, double charge) {
  noise.validate();
  require_positive(alpha, "alpha");
  require_positive(eta_geo, "eta_geo");
  const double x = noise.exponent;
  return 4.0 * force * force * mass * std::pow(ion_height, x + 4.0) /
         (noise.xi * kPi * kVacuumPermittivity * charge * charge * alpha * alpha * eta_geo * eta_geo *
          separation * separation * separation);
}

double ridge_omega(double k_r, double alpha, double mass, double eta_geo, double charge) {
  return charge * eta_geo / (std::sqrt(2.0) * k_r * k_r * mass * alpha);
}

OptimizedForms optimized_closed_forms(double k_r, double k_A, double alpha, double mass, double eta_geo,
                                      double force, const NoiseModel& noise, double charge) {
  noise.validate();
  require_positive(k_r, "k_r");
  require_positive(k_A, "k_A");
  require_positive(alpha, "alpha");
  OptimizedForms o;
  o.omega = ridge_omega(k_r, alpha, mass, eta_geo, charge);
  const double x = noise.exponent;
  const double kA3 = k_A * k_A * k_A;
  o.ksim = 4.0 * force * force * mass * std::pow(k_r, 4.0 + x) * std::pow(alpha, x - 1.0) /
           (noise.xi * charge * charge * eta_geo * eta_geo * kPi * kVacuumPermittivity * kA3);
  const double eta4 = std::pow(eta_geo, 4);
  o.interaction_time = force > 0.0 ? charge * charge * kPi * kVacuumPermittivity * kHbar / 2.0 * eta4 * kA3 /
                                         (std::pow(k_r, 8) * force * force * mass * mass * alpha)
                                   : std::numeric_limits<double>::infinity();
  return o;
}

std::string_view to_string(DetuningConvention c) {
  return c == DetuningConvention::kCyclic ? "cyclic" : "angular";
}

DetuningConvention parse_detuning_convention(std::string_view name) {
  if (name == "cyclic") return DetuningConvention::kCyclic;
  if (name == "angular") return DetuningConvention::kAngular;
  throw std::invalid_argument("unknown detuning convention: " + std::string(name));
}

double saturation_intensity(double linewidth_angular, double transition_wavelength) {
  const double h = 2.0 * kPi * kHbar;
  const double l3 = transition_wavelength * transition_wavelength * transition_wavelength;
  return kPi * h * kSpeedOfLight * linewidth_angular / (3.0 * l3);
}

void LaserForceModel::validate() const {
  require_positive(power, "laser power");
  require_positive(sheet_width, "sheet width");
  require_positive(detuning, "detuning");
  require_positive(wavelength, "wavelength");
  require_nonnegative(saturation_intensity, "saturation intensity");
  require_positive(linewidth, "linewidth");
  require_positive(fine_structure, "fine-structure splitting");
  if (!(detuning < fine_structure)) throw std::invalid_argument("detuning must be below the fine-structure splitting");
  if (sites_per_side < 2) throw std::invalid_argument("a light sheet needs at least two sites per side");
  if (observable_sites < 1) throw std::invalid_argument("observable site count must be at least 1");
  require_nonnegative(mean_phonon, "mean phonon number");
  require_nonnegative(initial_phonon, "initial phonon number");
}

double LaserForceModel::isat() const {
  return saturation_intensity > 0.0 ? saturation_intensity
                                    : ionlattice::saturation_intensity(kYbLinewidthAngular, kYbTransitionWavelength);
}

double LaserForceModel::detuning_term() const {
  return convention == DetuningConvention::kCyclic ? detuning / (2.0 * kPi) : detuning;
}

double LaserForceModel::fine_structure_term() const {
  return convention == DetuningConvention::kCyclic ? fine_structure / (2.0 * kPi) : fine_structure;
}

double LaserForceModel::sheet_area(double k_A, double alpha) const {
  return (sites_per_side - 1) * k_A * alpha * sheet_width;
}

double laser_force(const LaserForceModel& model, double k_A, double alpha) {
  model.validate();
  const double a = model.sheet_area(k_A, alpha);
  require_positive(a, "sheet area");
  const double g2 = model.linewidth * model.linewidth;
  return 2.0 * kPi * kHbar * model.power * g2 / (3.0 * a * model.detuning_term() * model.wavelength * model.isat());
}

double laser_power_for_force(const LaserForceModel& model, double k_A, double alpha, double force) {
  LaserForceModel unit = model;
  unit.power = 1.0;
  return force / laser_force(unit, k_A, alpha);
}

void MagneticForceModel::validate() const {
  require_positive(current, "wire current");
  require_nonnegative(offset_slope, "wire offset slope");
  require_positive(ion_height_slope, "k_r");
  if (!(angle >= 0.0 && angle < kPi / 2.0)) throw std::invalid_argument("wire angle must lie in [0, pi/2)");
  if (observable_sites < 1) throw std::invalid_argument("observable site count must be at least 1");
  require_nonnegative(mean_phonon, "mean phonon number");
}

double gradient_force(double gradient) { return kHbar * kElementaryCharge * gradient / (2.0 * kElectronMass); }

MagneticForce magnetic_force(const MagneticForceModel& model, double alpha) {
  model.validate();
  require_positive(alpha, "alpha");
  const double k2 = model.ion_height_slope * model.ion_height_slope + model.offset_slope * model.offset_slope;
  MagneticForce f;
  f.gradient = kVacuumPermeability * model.current / (2.0 * kPi * alpha * alpha * k2);
  f.gradient_xz = kVacuumPermeability * model.current * std::cos(model.angle) / (4.0 * kPi * alpha * alpha * k2);
  f.force = gradient_force(f.gradient_xz);
  return f;
}

double current_for_gradient(double gradient_xz, double alpha, double k_r, double k_a, double angle) {
  return gradient_xz * 4.0 * kPi * alpha * alpha * (k_r * k_r + k_a * k_a) / (kVacuumPermeability * std::cos(angle));
}

double sim_error(double force, double mass, double omega, int observable_sites, double mean_phonon) {
  require_nonnegative(mean_phonon, "mean phonon number");
  return force * force * observable_sites * (mean_phonon + 0.5) / (2.0 * kHbar * mass * omega * omega * omega);
}

double sim_error_laser(const LaserForceModel& m, double k_r, double k_A, double eta_geo, double alpha,
                       double mass, double charge) {
  m.validate();
  const double g4 = std::pow(m.linewidth, 4);
  const double ns1 = m.sites_per_side - 1;
  const double num = m.observable_sites * std::pow(k_r, 6) * g4 * mass * mass * m.power * m.power * alpha *
                     (m.mean_phonon + 0.5);
  const double den = std::pow(eta_geo, 3) * ns1 * ns1 * k_A * k_A * m.sheet_width * m.sheet_width *
                     std::pow(m.detuning_term(), 2) * m.wavelength * m.wavelength * m.isat() * m.isat();
  return 4.0 * std::sqrt(2.0) / 9.0 * kPi * kPi * kHbar / std::pow(charge, 3) * num / den;
}

double sim_error_mag(const MagneticForceModel& m, double eta_geo, double alpha, double mass, double charge) {
  m.validate();
  const double kr = m.ion_height_slope;
  const double k2 = kr * kr + m.offset_slope * m.offset_slope;
  const double c = std::cos(m.angle);
  const double num = std::pow(kr, 6) * mass * mass * m.current * m.current * c * c * m.observable_sites *
                     (m.mean_phonon + 0.5);
  const double den = std::pow(eta_geo, 3) * k2 * k2 * alpha;
  return std::sqrt(2.0) / 64.0 * kHbar * kVacuumPermeability * kVacuumPermeability /
         (kPi * kPi * kElectronMass * kElectronMass * charge) * num / den;
}

double sim_error_heating(double force, double mass, double omega, int observable_sites, double initial_phonon,
                         double ksim) {
  require_positive(ksim, "K_sim");
  return sim_error(force, mass, omega, observable_sites, initial_phonon + 1.0 / ksim);
}

SpontaneousEmission spontaneous_emission(const LaserForceModel& m, double k_A, double alpha,
                                         std::optional<double> interaction_time) {
  m.validate();
  SpontaneousEmission s;
  s.rabi = m.linewidth * std::sqrt(m.power / (2.0 * m.sheet_area(k_A, alpha) * m.isat()));
  const double d = m.detuning_term();
  const double fs = m.fine_structure_term();
  s.rate = m.linewidth * s.rabi * s.rabi / 6.0 * (1.0 / (d * d) + 2.0 / ((fs - d) * (fs - d)));
  s.time = 1.0 / s.rate;
  if (interaction_time) s.lsim = s.time / *interaction_time;
  return s;
}

double optimal_detuning(double fine_structure) {
  // At fixed force g^2 scales with the detuning, so S ~ 1/D + 2 D / (fs - D)^2.
  auto cost = [&](double d) { return 1.0 / d + 2.0 * d / ((fine_structure - d) * (fine_structure - d)); };
  const double phi = 0.5 * (std::sqrt(5.0) - 1.0);
  double a = 1e-6 * fine_structure, b = (1.0 - 1e-6) * fine_structure;
  double c = b - phi * (b - a), d = a + phi * (b - a);
  double fc = cost(c), fd = cost(d);
  while (b - a > 1e-12 * fine_structure) {
    if (fc < fd) {
      b = d, d = c, fd = fc;
      c = b - phi * (b - a), fc = cost(c);
    } else {
      a = c, c = d, fc = fd;
      d = a + phi * (b - a), fd = cost(d);
    }
  }
  return 0.5 * (a + b);
}

double power_dissipation(double voltage, double drive, double capacitance, double resistance) {
  return 0.5 * voltage * voltage * capacitance * capacitance * resistance * drive * drive;
}

OperatingPoint unique_operating_point(double mass, double q, double k_r, double eta_geo, double alpha,
                                      double capacitance, double resistance, double charge) {
  if (!(q > 0.0 && q < 0.9)) throw std::domain_error("stability parameter must lie in (0, 0.9)");
  require_positive(capacitance, "capacitance");
  require_positive(resistance, "resistance");
  OperatingPoint p;
  p.voltage = 2.0 * charge * eta_geo / (mass * k_r * k_r * q);
  p.drive = p.voltage / alpha;
  p.power = 8.0 * std::pow(charge, 4) * std::pow(eta_geo, 4) * capacitance * capacitance * resistance /
            (std::pow(k_r, 8) * std::pow(mass, 4) * std::pow(q, 4) * alpha * alpha);
  return p;
}

MetricsReport make_report(double force, double mass, double omega, double separation, double ion_height,
                          const NoiseModel& noise, int observable_sites, double mean_phonon,
                          std::optional<SpontaneousEmission> scattering, double charge) {
  MetricsReport r;
  r.force = force;
  r.omega = omega;
  r.separation = separation;
  r.ion_height = ion_height;
  const Coupling c = coupling_and_beta(force, mass, omega, separation, charge);
  const Heating h = heating_and_ksim(mass, omega, separation, ion_height, force, noise, charge);
  r.coupling_rate = c.rate;
  r.beta = c.beta;
  r.interaction_time = c.interaction_time;
  r.heating_time = h.heating_time;
  r.ksim = h.ksim;
  r.sim_error = sim_error(force, mass, omega, observable_sites, mean_phonon);
  r.noise_label = std::string(to_string(noise.preset));
  if (scattering) {
    r.scattering_rate = scattering->rate;
    r.scattering_time = scattering->time;
    if (r.interaction_time) r.lsim = scattering->time / *r.interaction_time;
  }
  return r;
}

}  // namespace ionlattice
