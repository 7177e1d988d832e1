"""Pseudo-spectral solver for the steady triple-deck equations over wall roughness."""

from .airy import eval_airy, selftest as airy_selftest
from .errors import (
    AliasWarning,
    ConfigError,
    DivergenceError,
    InvariantViolationError,
    NearSingularMultiplierError,
    TripleDeckError,
)
from .fields import blasius_solve, outer_layers, reconstruct, untransform
from .grid import Grid, RoughnessProfile, SpectralField
from .kernel import apply_green, boundary_solution, build_mode_kernel
from .linear import build_multiplier, multiplier_report, solve_linear
from .nonlinear import SolverOptions, solve_nonlinear, uniqueness_probe
from .norms import displacement_norm, proposition_ratios, vorticity_norms

__version__ = "0.1.0"

__all__ = [
    "AliasWarning",
    "ConfigError",
    "DivergenceError",
    "Grid",
    "InvariantViolationError",
    "NearSingularMultiplierError",
    "RoughnessProfile",
    "SolverOptions",
    "SpectralField",
    "TripleDeckError",
    "airy_selftest",
    "apply_green",
    "blasius_solve",
    "boundary_solution",
    "build_mode_kernel",
    "build_multiplier",
    "displacement_norm",
    "eval_airy",
    "multiplier_report",
    "outer_layers",
    "proposition_ratios",
    "reconstruct",
    "solve_linear",
    "solve_nonlinear",
    "uniqueness_probe",
    "untransform",
    "vorticity_norms",
]
