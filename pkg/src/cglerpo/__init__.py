"""Relative time-periodic solutions of the cubic complex Ginzburg-Landau equation.

Space-time spectral Galerkin discretization, matrix-free minimum-norm
Newton-GMRES with a block-diagonal preconditioner, pseudo-arclength
continuation in the equation parameters, symmetry/orbit classification, and
Floquet-type stability via the relative monodromy matrix.
"""

from .spectral import (CollocationField, Grid, SpectralField, cubic_conv,
                       decay_ratio, power_spectra, to_physical, to_spectral)
from .system import (GroupShift, Parameters, StatePoint, jvp, kernel_generators,
                     pack_state, param_column, precond_apply, residual,
                     residual_norm, select_swap_columns, unpack_state)
from .newton import (GmresConfig, NewtonConfig, NewtonResult, StepReport,
                     bordered_newton_step, gmres, newton_solve)
from .continuation import ContinuationConfig, PathRecord, correct, predict, run
from .symmetry import (OrbitRelation, SymmetryReport, conjugate, count_distinct,
                       detect_l_symmetry, detect_reflection, same_orbit, torus_act)
from .dynamics import (MonodromyResult, OdeState, closure_residual, integrate,
                       ode_rhs, plane_wave, relative_monodromy)
from .fileio import (PathCsvWriter, SolutionFormatError, read_solution,
                     write_solution)

__version__ = "0.1.0"

__all__ = [
    "Grid", "SpectralField", "CollocationField", "to_physical", "to_spectral",
    "cubic_conv", "power_spectra", "decay_ratio",
    "Parameters", "GroupShift", "StatePoint", "residual", "residual_norm",
    "jvp", "param_column", "kernel_generators", "precond_apply",
    "select_swap_columns", "pack_state", "unpack_state",
    "GmresConfig", "NewtonConfig", "StepReport", "NewtonResult", "gmres",
    "bordered_newton_step", "newton_solve",
    "ContinuationConfig", "PathRecord", "predict", "correct", "run",
    "SymmetryReport", "OrbitRelation", "torus_act", "conjugate",
    "detect_l_symmetry", "detect_reflection", "same_orbit", "count_distinct",
    "OdeState", "MonodromyResult", "ode_rhs", "integrate", "closure_residual",
    "relative_monodromy", "plane_wave",
    "read_solution", "write_solution", "PathCsvWriter", "SolutionFormatError",
]
