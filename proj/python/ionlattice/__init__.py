"""Surface-electrode ion-trap lattice design and optimization."""

from ._ionlattice import (
    CellType,
    ConfigError,
    ElectrodeLayout,
    InfeasibleError,
    LatticeSpec,
    NoiseModel,
    PseudoContext,
    RunConfig,
    SolverError,
    __version__,
    build_five_wire,
    build_lattice_layout,
    characterize_lattice,
    command_names,
    coupling_and_beta,
    field_at,
    find_null,
    fit_scaling_law,
    heating_and_ksim,
    lattice_side_length,
    optimized_closed_forms,
    power_dissipation,
    pseudo_hessian,
    pseudopotential,
    run_case_study,
    run_command,
    run_validation,
    secular_frequencies,
    sim_error,
    site_positions,
    stability_q,
    unique_operating_point,
)

__all__ = [name for name in dir() if not name.startswith("_")]
