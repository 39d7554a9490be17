#pragma once

// CODATA 2018 values, SI units.
namespace ionlattice::constants {

inline constexpr double kPi = 3.14159265358979323846;
inline constexpr double kElementaryCharge = 1.602176634e-19;    // C
inline constexpr double kHbar = 1.054571817e-34;                // J s
inline constexpr double kVacuumPermittivity = 8.8541878128e-12; // F/m
inline constexpr double kVacuumPermeability = 1.25663706212e-6; // N/A^2
inline constexpr double kElectronMass = 9.1093837015e-31;       // kg
inline constexpr double kAtomicMassUnit = 1.66053906660e-27;    // kg
inline constexpr double kSpeedOfLight = 299792458.0;            // m/s

// 171Yb+ : neutral atomic mass minus one electron.
inline constexpr double kYb171IonMassAmu = 170.93578;

inline constexpr double kMicro = 1e-6;

inline constexpr double joules_to_ev(double j) { return j / kElementaryCharge; }
inline constexpr double ev_to_joules(double ev) { return ev * kElementaryCharge; }

}  // namespace ionlattice::constants
