#pragma once

#include <Eigen/Core>

#include "ionlattice/constants.hpp"
#include "ionlattice/geometry.hpp"

namespace ionlattice {

/// Charge, mass and rf drive that turn a field into a ponderomotive potential.
struct PseudoContext {
  double charge = constants::kElementaryCharge;  // C
  double mass = constants::kYb171IonMassAmu * constants::kAtomicMassUnit;  // kg
  double drive = 2.0 * constants::kPi * 30e6;    // Omega, rad/s
  double rf_amplitude = 100.0;                    // V, volts

  void validate() const;
  double alpha() const { return rf_amplitude / drive; }
};

// Closed-form line integral of (p - x') x ds / |p - x'|^3 along the straight
// segment a -> b (both in the z = 0 plane), evaluated at p.
Eigen::Vector3d segment_kernel(const Eigen::Vector2d& a, const Eigen::Vector2d& b,
                               const Eigen::Vector3d& p);

// Field per volt of rf amplitude. Requires p.z() > 0 (std::domain_error otherwise).
Eigen::Vector3d unit_field(const ElectrodeLayout& layout, const Eigen::Vector3d& p);

// Electric field in V/m of the layout at its own rf_amplitude, sign chosen so
// that E = -grad(phi) with phi = V inside the electrode.
Eigen::Vector3d field_at(const ElectrodeLayout& layout, const Eigen::Vector3d& p);

// Psi = e^2 |E|^2 / (4 m Omega^2) in joules, with E taken at ctx.rf_amplitude.
double pseudopotential(const ElectrodeLayout& layout, const PseudoContext& ctx,
                       const Eigen::Vector3d& p);

// max(1e-9 m, 1e-4 z); throws std::domain_error if the stencil would reach z <= 0.
double fd_step(const Eigen::Vector3d& p);

// dE_i/dx_j at the layout's rf_amplitude, by central differences.
Eigen::Matrix3d field_jacobian(const ElectrodeLayout& layout, const Eigen::Vector3d& p);

// Same, per volt.
Eigen::Matrix3d unit_field_jacobian(const ElectrodeLayout& layout, const Eigen::Vector3d& p);

// Hessian of Psi by central second differences of Psi, symmetrized.
Eigen::Matrix3d pseudo_hessian(const ElectrodeLayout& layout, const PseudoContext& ctx,
                               const Eigen::Vector3d& p);

// Hessian of Psi assembled as e^2/(2 m Omega^2) * (J^T J + sum_k E_k d2E_k),
// with field derivatives from central differences of E. Independent of
// pseudo_hessian; the two are cross-checked in tests.
Eigen::Matrix3d pseudo_hessian_assembled(const ElectrodeLayout& layout, const PseudoContext& ctx,
                                         const Eigen::Vector3d& p);

}  // namespace ionlattice
