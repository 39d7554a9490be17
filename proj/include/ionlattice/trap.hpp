#pragma once

#include <array>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "ionlattice/field.hpp"
#include "ionlattice/geometry.hpp"

namespace ionlattice {

/// Drive and species. alpha = V / Omega is always derived.
struct DriveAndSpecies {
  double rf_amplitude = 100.0;  // V
  double drive = 2.0 * constants::kPi * 30e6;  // Omega, rad/s
  double mass = constants::kYb171IonMassAmu * constants::kAtomicMassUnit;
  double charge = constants::kElementaryCharge;
  std::string ion_label = "171Yb+";

  double alpha() const { return rf_amplitude / drive; }
  PseudoContext context() const { return {charge, mass, drive, rf_amplitude}; }
  static DriveAndSpecies from_alpha(double alpha, double drive, double mass);
};

enum class NullStatus { kConverged, kNotConverged, kNoTrap };
std::string_view to_string(NullStatus s);

struct NullResult {
  NullStatus status = NullStatus::kNotConverged;
  Eigen::Vector3d position = Eigen::Vector3d::Zero();
  double residual = 0.0;  // |E| in V/m at the layout's rf_amplitude
  int iterations = 0;
};

struct NullOptions {
  int max_iterations = 100;
  int max_halvings = 30;
  // Accept when |E| <= relative_tolerance * V / z.
  double relative_tolerance = 1e-10;
};

// Gauss-Newton on the residual E(x) with the field Jacobian and step-halving
// backtracking on |E|^2.
NullResult find_null(const ElectrodeLayout& layout, const Eigen::Vector3d& initial_guess,
                     const NullOptions& options = {});

struct SecularModes {
  std::array<double, 3> omega{};  // ascending, rad/s
  Eigen::Matrix3d axes = Eigen::Matrix3d::Identity();  // column k is the axis of omega[k]
  std::array<double, 3> curvature{};  // Hessian eigenvalues, J/m^2
  bool is_minimum = false;
  int radial_index = 0;  // smallest mode whose axis lies mostly in the plane

  double radial() const { return omega[static_cast<std::size_t>(radial_index)]; }
};

// omega_k = sqrt(lambda_k / m) from the pseudo-Hessian at the null.
SecularModes secular_frequencies(const ElectrodeLayout& layout, const PseudoContext& ctx,
                                 const Eigen::Vector3d& null);

// Second derivatives of Psi along each column of `axes`, from quartic
// least-squares fits to samples at s = +-k span / samples. Shares no stencil
// with pseudo_hessian.
std::array<double, 3> sampled_curvatures(const ElectrodeLayout& layout, const PseudoContext& ctx,
                                         const Eigen::Vector3d& null, const Eigen::Matrix3d& axes,
                                         double span, int samples = 6);

struct DepthOptions {
  int vertical_samples = 200;  // log-spaced from r to 50 r
  double vertical_span = 50.0;
  int path_samples = 200;
};

enum class EscapeChannel { kNone, kVertical, kInterWell };

struct DepthResult {
  bool trapped = false;
  double depth = 0.0;  // joules
  EscapeChannel channel = EscapeChannel::kNone;
  Eigen::Vector3d escape_point = Eigen::Vector3d::Zero();
  double vertical_barrier = 0.0;
  std::optional<double> interwell_barrier;
};

// Lowest barrier over the vertical ray and straight paths to the given
// neighbouring nulls, relative to Psi at the null.
DepthResult trap_depth(const ElectrodeLayout& layout, const PseudoContext& ctx,
                       const Eigen::Vector3d& null,
                       const std::vector<Eigen::Vector3d>& neighbor_nulls,
                       const DepthOptions& options = {});

struct EtaZeta {
  double eta_geo = 0.0;
  double zeta = 0.0;  // 1/m^2
  bool eta_valid = false;
};

// eta_geo = sqrt(2) m Omega r^2 omega / (e V);  zeta = T_D pi^2 m / (e^2 alpha^2)
EtaZeta extract_eta_zeta(double ion_height, double omega, double depth_joules,
                         const PseudoContext& ctx);

// q = 2 e eta V / (m r^2 Omega^2)
double stability_q(double eta_geo, double ion_height, const PseudoContext& ctx);

inline constexpr double kMaxStableQ = 0.9;
inline bool q_accepted(double q) { return q > 0.0 && q < kMaxStableQ; }

// Throws std::domain_error if q is outside (0, 0.9).
void require_stable(double q);

// kUnstable: a trap whose q at the given drive fails the stability gate.
enum class SiteStatus { kTrap, kSaddle, kNoNull, kUntrapped, kEtaInvalid, kUnstable };
std::string_view to_string(SiteStatus s);

struct TrapSite {
  SiteIndex index;
  SiteStatus status = SiteStatus::kNoNull;
  NullResult null;
  double ion_height = 0.0;
  SecularModes modes;
  DepthResult depth;
  double depth_ev = 0.0;
  double eta_geo = 0.0;
  double zeta = 0.0;
  double q = 0.0;

  bool ok() const { return status == SiteStatus::kTrap; }
  double omega() const { return modes.radial(); }
};

struct CharacterizeOptions {
  bool compute_depth = true;
  // Only characterize these site positions in the list (by index); empty means all.
  std::vector<std::size_t> only;
  NullOptions null_options{};
  DepthOptions depth_options{};
  unsigned threads = 0;  // 0 = hardware concurrency
  // Off when the drive is only a reference that is rescaled afterwards.
  bool stability_gate = true;
};

// Characterizes every site (or `options.only`); nulls are seeded above each
// site center at the distance to the nearest layout vertex. Sites where the
// null search fails are reported individually. Throws std::runtime_error only
// when no requested site is a pseudopotential minimum.
std::vector<TrapSite> characterize_lattice(const ElectrodeLayout& layout, const PseudoContext& ctx,
                                           const std::vector<SiteIndex>& sites,
                                           const CharacterizeOptions& options = {});

// Index of the site nearest the centroid; ties go to the smallest (i, j).
std::size_t central_site(const std::vector<SiteIndex>& sites);

// Nearest neighbours of sites[k] (within 1e-6 relative of the minimum spacing).
std::vector<std::size_t> adjacent_sites(const std::vector<SiteIndex>& sites, std::size_t k);

}  // namespace ionlattice
