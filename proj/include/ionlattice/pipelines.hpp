#pragma once

#include <array>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "ionlattice/config.hpp"
#include "ionlattice/io.hpp"
#include "ionlattice/metrics.hpp"
#include "ionlattice/optimizer.hpp"
#include "ionlattice/trap.hpp"

namespace ionlattice {

enum ExitCode : int {
  kExitSuccess = 0,
  kExitToleranceFailure = 2,
  kExitInfeasible = 3,
  kExitSolverFailure = 4,
};

// A constraint set with no solution; `constraint` names the binding config key.
class InfeasibleError : public std::runtime_error {
 public:
  InfeasibleError(std::string constraint, const std::string& detail)
      : std::runtime_error(constraint + ": " + detail), constraint_(std::move(constraint)) {}
  const std::string& constraint() const { return constraint_; }

 private:
  std::string constraint_;
};

class SolverError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// ---- validate: five-wire reference geometries -------------------------------

struct FiveWireCase {
  double rail_width_um = 0.0;
  double central_width_um = 0.0;
  double voltage = 0.0;
  double drive_mhz = 0.0;
  double expected_r_um = 0.0;
  double expected_omega_mhz = 0.0;
};

inline constexpr double kHeightTolerance = 0.02;
inline constexpr double kFrequencyTolerance = 0.03;
inline constexpr double kCurvatureTolerance = 1e-3;

// Inputs as reconciled with the reference heights and frequencies.
std::array<FiveWireCase, 6> five_wire_cases();
// Inputs exactly as printed in the reference table.
std::array<FiveWireCase, 6> five_wire_cases_literal();

struct FiveWireResult {
  FiveWireCase input;
  double r_um = 0.0;
  double omega_mhz = 0.0;  // radial mode in the x-z plane, omega / 2 pi
  std::array<double, 3> modes_mhz{};
  double r_deviation = 0.0;      // relative
  double omega_deviation = 0.0;  // relative
  bool pass = false;
  // Hessian eigenvalue frequencies against sampled-parabola frequencies.
  std::array<double, 3> sampled_mhz{};
  std::array<double, 3> mode_deviation{};
  std::array<bool, 3> radial_mode{};
  double max_radial_deviation = 0.0;
};

FiveWireResult solve_five_wire(const FiveWireCase& c, double mass);

struct ValidationReport {
  std::vector<FiveWireResult> rows;
  std::vector<FiveWireResult> literal_rows;
  bool table_pass = false;
  bool hessian_pass = false;
  double max_hessian_deviation = 0.0;
  bool pass() const { return table_pass && hessian_pass; }
};

ValidationReport run_validation(const RunConfig& config);

// ---- homogenize ----------------------------------------------------------

struct HomogenizeReport {
  LatticeSpec spec;  // with the optimum gap
  GOptimum optimum;
  std::vector<HomogeneityResult> slices;
  std::vector<TrapSite> sites;  // at the optimum, with depth
};

// g/L used for downstream stages: optimum of the template, or the fixed value.
GOptimum homogeneity_optimum(const RunConfig& config, const LatticeSpec& spec);
HomogenizeReport run_homogenize(const RunConfig& config);

// ---- sides ---------------------------------------------------------------

struct SidesReport {
  std::vector<SidesPoint> points;
  std::optional<int> crossing;  // smallest n with every n' >= n at or above the threshold
  double threshold = 0.95;
};

SidesReport run_sides(const RunConfig& config);

// ---- scan ----------------------------------------------------------------

struct ScanReport {
  double g_over_L = 0.0;
  double resolution = 0.0;
  ScanGrid grid;
  std::vector<RidgePoint> ridge;
  std::optional<KCoefficients> k;
  std::string k_error;  // why k is absent
};

ScanReport run_scan(const RunConfig& config, double resolution_m);

// ---- scaling -------------------------------------------------------------

struct ScalingReport {
  ScalingStudy sizes;
  ScalingStudy masses;
};

ScalingReport run_scaling(const RunConfig& config);

// ---- case study ----------------------------------------------------------

struct LaserCase {
  double power = 0.0;
  double force = 0.0;
  double ksim = 0.0;
  double ksim_closed_form = 0.0;
  double lsim = 0.0;
  double sim_error = 0.0;
  double coupling_rate = 0.0;
  double beta = 0.0;
  double interaction_time = 0.0;
  double heating_time = 0.0;
  double scattering_rate = 0.0;
  double rabi = 0.0;
};

struct MagneticCase {
  double gradient_xz = 0.0;
  double current = 0.0;
  double force = 0.0;
  double ksim = 0.0;
  double sim_error = 0.0;
  double coupling_rate = 0.0;
  double beta = 0.0;
};

struct LaserSweepPoint {
  double alpha = 0.0, power = 0.0, sim_error = 0.0, ksim = 0.0, lsim = 0.0, coupling_rate = 0.0;
};

struct MagneticSweepPoint {
  double alpha = 0.0, gradient_xz = 0.0, current = 0.0, sim_error = 0.0, ksim = 0.0, coupling_rate = 0.0;
};

struct CaseStudyReport {
  ScanReport scan;
  double k_r = 0.0, k_A = 0.0, k_R = 0.0, eta_geo = 0.0;
  double alpha = 0.0;
  double ion_height = 0.0, radius = 0.0, separation = 0.0;
  double omega = 0.0;
  double q = 0.0;
  OperatingPoint operating;
  LaserCase laser;
  MagneticCase magnetic;
  std::vector<LaserSweepPoint> laser_sweep;
  std::vector<MagneticSweepPoint> magnetic_sweep;
};

// Throws InfeasibleError when a limit in the config cannot be met.
CaseStudyReport run_case_study(const RunConfig& config);

// ---- field map -----------------------------------------------------------

struct FieldMapPoint {
  Eigen::Vector3d position = Eigen::Vector3d::Zero();
  Eigen::Vector3d field = Eigen::Vector3d::Zero();
  double pseudo_ev = 0.0;
};

struct FieldMapReport {
  LatticeSpec spec;
  ElectrodeLayout layout;
  std::vector<FieldMapPoint> points;
};

FieldMapReport run_field_map(const RunConfig& config);

// ---- commands ------------------------------------------------------------

// Runs one subcommand, writes its files under `out` and returns the exit code.
// Throws InfeasibleError, SolverError or ConfigError.
int run_command(const std::string& name, const RunConfig& config, const std::filesystem::path& out);

const std::vector<std::string>& command_names();

Json fit_to_json(const FitResult& fit);
Json k_to_json(const KCoefficients& k);
Json validation_to_json(const ValidationReport& report);
// Without the scan block.
Json case_study_to_json(const CaseStudyReport& report);

}  // namespace ionlattice
