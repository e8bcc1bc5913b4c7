"""Semiclassical spectra of Hartree-type operators from moment dynamics.

The package computes energy-level asymptotics of nonlinear Schroedinger
operators with a smooth integral kernel without ever touching the quantum
PDE: it finds a rest point of the mean-point dynamics, solves the
linearized mode problem there, applies the nonlinear frequency
corrections, and assembles the level table.  A companion integrator
evolves the finite moment systems in time and monitors their invariants.
"""

from .errors import (
    ConfigError,
    ConvergenceError,
    DegenerateModesError,
    EllipticityError,
    HartreeSpectrumError,
    NormalizationError,
    PositivityError,
    SingularJacobianError,
)
from .symbols import (
    GaussianOscillatorModel,
    HamiltonianOracle,
    KernelOracle,
    SymbolModel,
    as_phase_point,
    gaussian_kernel,
    make_magnetic_oscillator_3d,
    make_oscillator_1d,
    symplectic_form,
)
from .restpoint import RestPoint, find_rest_point, verify_rest_point
from .modes import ModeSet, skew_product, solve_modes
from .spectrum import (
    CorrectedFrequencies,
    SpectrumTable,
    StationaryMoments,
    closed_form_spectrum_1d,
    closed_form_spectrum_3d,
    corrected_frequencies,
    energy_levels,
    ground_energy,
    moments_from_mode_matrix,
    stationary_moments,
    transition_frequency,
    uncertainty_margin,
)
from .dynamics import (
    MomentState,
    Trajectory,
    action_series,
    extract_trajectory_frequencies,
    forcing,
    gaussian_initial_moments,
    integrate,
    propagate_moments,
    reconstruct_z1,
    rhs_order0,
    rhs_order2,
    stationary_z1,
    write_trajectory_csv,
)

__version__ = "0.1.0"

__all__ = [
    "HartreeSpectrumError",
    "ConvergenceError",
    "SingularJacobianError",
    "EllipticityError",
    "DegenerateModesError",
    "PositivityError",
    "NormalizationError",
    "ConfigError",
    "SymbolModel",
    "HamiltonianOracle",
    "KernelOracle",
    "GaussianOscillatorModel",
    "gaussian_kernel",
    "make_oscillator_1d",
    "make_magnetic_oscillator_3d",
    "symplectic_form",
    "as_phase_point",
    "RestPoint",
    "find_rest_point",
    "verify_rest_point",
    "ModeSet",
    "skew_product",
    "solve_modes",
    "CorrectedFrequencies",
    "SpectrumTable",
    "StationaryMoments",
    "corrected_frequencies",
    "ground_energy",
    "energy_levels",
    "stationary_moments",
    "moments_from_mode_matrix",
    "transition_frequency",
    "uncertainty_margin",
    "closed_form_spectrum_1d",
    "closed_form_spectrum_3d",
    "MomentState",
    "Trajectory",
    "rhs_order0",
    "rhs_order2",
    "forcing",
    "integrate",
    "propagate_moments",
    "reconstruct_z1",
    "stationary_z1",
    "action_series",
    "gaussian_initial_moments",
    "extract_trajectory_frequencies",
    "write_trajectory_csv",
]
