#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "ionlattice/fit.hpp"
#include "ionlattice/geometry.hpp"
#include "ionlattice/metrics.hpp"
#include "ionlattice/trap.hpp"

namespace ionlattice {

// Per-site K_sim relative to the central site. F, Xi and alpha cancel, leaving
// (r_n / r_c)^x (omega_c / omega_n)^2. Sites without a trap count as K = 0.
struct HomogeneityResult {
  double g_over_L = 0.0;
  double H = 0.0;
  double sigma_H = 0.0;          // propagated from 10 % per-site K_sim errors
  double sigma_H_caption = 0.0;  // 0.13 / sqrt(N) * H
  std::vector<SiteIndex> sites;
  std::vector<double> scaled_ksim;
  std::size_t central = 0;
  int failed_sites = 0;
};

inline constexpr double kSiteKsimRelativeError = 0.10;

HomogeneityResult homogeneity_from_sites(const std::vector<TrapSite>& sites, double exponent = 4.0);

// Builds the lattice with g = g_over_L * L and evaluates H.
HomogeneityResult evaluate_homogeneity(LatticeSpec spec, double g_over_L, const PseudoContext& ctx,
                                       double exponent = 4.0, unsigned threads = 0);

struct GSearchOptions {
  double lower = 0.025;
  double upper = 1.5;
  double step = 0.025;
  double tolerance = 1e-3;
  double exponent = 4.0;
  unsigned threads = 0;
};

struct GOptimum {
  HomogeneityResult best;
  bool at_boundary = false;
  std::vector<double> grid_g;  // coarse scan
  std::vector<double> grid_H;
};

// Grid scan over g/L followed by golden-section refinement around the best node.
GOptimum optimize_g(const LatticeSpec& spec, const PseudoContext& ctx, const GSearchOptions& options = {});

// How K_sim of the central site is compared across polygon side counts.
enum class SidesMetric {
  kFixedDrive,     // same V and Omega for every n
  kMinimumDepth,   // each n at its own alpha giving the minimum trap depth
};

struct SidesOptions {
  std::vector<int> sides{3, 4, 5, 6, 8, 10, 12, 16, 20, 25, 30, 40, 60, 80, 100};
  int reference_sides = 100;
  bool reoptimize_g = true;
  double fixed_g_over_L = 1.0;  // used when reoptimize_g is false
  SidesMetric metric = SidesMetric::kFixedDrive;
  double min_depth = constants::ev_to_joules(0.1);
  GSearchOptions g_search{};
};

struct SidesPoint {
  int sides = 0;
  double g_over_L = 0.0;
  double ksim_per_force2 = 0.0;  // K / F^2 at the compared operating point
  double scaled = 0.0;           // relative to reference_sides
  double ion_height = 0.0;
  double omega = 0.0;
  double alpha = 0.0;
  bool valid = false;
};

std::vector<SidesPoint> sweep_polygon_sides(const LatticeSpec& spec, const PseudoContext& ctx,
                                            const NoiseModel& noise, const SidesOptions& options = {});

struct ScanOptions {
  double a_min = 30e-6, a_max = 100e-6;
  double r_min = 4e-6, r_max = 40e-6;
  double resolution = 2e-6;
  double min_depth = constants::ev_to_joules(0.1);
  double alpha_ref = 1e-6;  // V s
  double drive_ref = 2.0 * constants::kPi * 10e6;
  double g_over_L = 1.0;
  double mass = constants::kYb171IonMassAmu * constants::kAtomicMassUnit;
  double charge = constants::kElementaryCharge;
  NoiseModel noise = NoiseModel::cryogenic();
  unsigned threads = 0;
};

struct ScanCell {
  std::size_t a_index = 0, r_index = 0;
  double A = 0.0, R = 0.0;
  bool valid = false;
  SiteStatus status = SiteStatus::kNoNull;
  EscapeChannel channel = EscapeChannel::kNone;
  double alpha = 0.0;        // alpha giving the minimum depth
  double ion_height = 0.0;
  double omega = 0.0;        // at alpha
  double eta_geo = 0.0;
  double zeta = 0.0;
  double depth_ref = 0.0;    // J at alpha_ref
  double ksim_scaled = 0.0;  // K / (F^2 alpha^3)
};

struct ScanGrid {
  std::vector<double> A_values, R_values;
  std::vector<ScanCell> cells;  // only R < A/3, ordered by (A, R)
};

std::vector<double> grid_axis(double lo, double hi, double step);

// Characterizes the central site of every (A, R) with R < A/3 at alpha_ref and
// rescales to the alpha giving min_depth (depth grows as alpha^2).
ScanGrid scan_A_R(const LatticeSpec& tmpl, const ScanOptions& options);

struct RidgePoint {
  double alpha = 0.0;
  ScanCell cell;
  bool on_grid_edge = false;  // maximum at an end of the alpha contour
  bool box_limited = false;   // best shape at this alpha lies outside the scan range
  bool usable() const { return !on_grid_edge && !box_limited; }
};

// For each alpha bin centre, follows the alpha contour through the grid
// (linear interpolation along grid edges between valid cells) and takes the
// point of highest K / (F^2 alpha^3), refined by a parabola in R/A.
// K / (F^2 alpha^3) depends on shape only, so the best cell overall fixes
// A/alpha and R/alpha; bins where that shape comes within one grid step of
// the scan range are box-limited.
std::vector<RidgePoint> extract_ridge(const ScanGrid& grid, double bin_width = 0.02e-6);

struct KCoefficients {
  FitResult r_fit, A_fit, R_fit;
  double k_r = 0.0, k_A = 0.0, k_R = 0.0;
  double eta_geo = 0.0;
  double ksim_scaled = 0.0;   // mean K / (F^2 alpha^3) over the ridge
  double cubic_slope = 0.0;   // d log(K/F^2) / d log alpha
  std::size_t samples = 0;
  bool linear = false;        // every R^2 >= 0.99
};

inline constexpr double kMinLinearR2 = 0.99;

// Needs at least five interior ridge points.
KCoefficients extract_k_coefficients(const std::vector<RidgePoint>& ridge);

struct ScalingEntry {
  int sites_per_side = 0;
  int site_count = 0;
  double mass = 0.0;
  double g_over_L = 0.0;
  bool g_at_boundary = false;
  std::vector<RidgePoint> ridge;
  std::optional<KCoefficients> k;
};

struct ScalingStudy {
  std::vector<ScalingEntry> entries;
  std::optional<FitResult> g_fit;
  std::optional<FitResult> R_fit;
  std::optional<FitResult> A_fit;
  std::optional<FitResult> ksim_fit;
};

struct ScalingOptions {
  ScanOptions scan{};
  GSearchOptions g_search{};
  double bin_width = 0.02e-6;
  std::uint64_t seed = 1;
};

// Cascade per lattice size: homogeneity optimum, then (A, R) scan, then ridge fits.
ScalingStudy scaling_study_sizes(const LatticeSpec& tmpl, const std::vector<int>& sites_per_side,
                                 const ScalingOptions& options);

// Same lattice, different ion masses (kg); g/L is optimized once. The alpha
// bin width scales as sqrt(m / scan.mass).
ScalingStudy scaling_study_masses(const LatticeSpec& tmpl, const std::vector<double>& masses,
                                  const ScalingOptions& options);

}  // namespace ionlattice
