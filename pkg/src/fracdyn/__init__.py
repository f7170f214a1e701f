"""Tools for simulating dynamics constrained through fractional derivatives."""

from .constrained_dynamics import (
    ConstraintSpec,
    HamiltonSpec,
    SystemSpec,
    hamilton_rhs,
    lambda_general,
    rhs_general,
    rhs_linear,
    rhs_nonlinear_frac_oscillator,
    variational_residual,
)
from .fode_solver import (
    History,
    IntegratorConfig,
    SimulationResult,
    convergence_study,
    integrate_fractional_abm,
    integrate_hamilton,
    integrate_second_order,
)
from .frac_ops import (
    caputo_left,
    caputo_left_history,
    caputo_right,
    commutation_defect,
    fractional_integral,
    l1_caputo_series,
    prop1_shift,
    riemann_liouville_left,
    riemann_liouville_right,
)
from .mittag_leffler import MLParams, ml, ml_decomp_f, ml_decomp_g
from .oscillator_exact import OscillatorSpec, decomposed_solution, exact_solution, forcing
from .series import FracOrder, Grid, SampleSeries

__all__ = [
    "FracOrder",
    "Grid",
    "SampleSeries",
    "fractional_integral",
    "caputo_left",
    "caputo_right",
    "caputo_left_history",
    "l1_caputo_series",
    "riemann_liouville_left",
    "riemann_liouville_right",
    "commutation_defect",
    "prop1_shift",
    "MLParams",
    "ml",
    "ml_decomp_f",
    "ml_decomp_g",
    "OscillatorSpec",
    "forcing",
    "exact_solution",
    "decomposed_solution",
    "ConstraintSpec",
    "SystemSpec",
    "HamiltonSpec",
    "lambda_general",
    "rhs_linear",
    "rhs_general",
    "rhs_nonlinear_frac_oscillator",
    "hamilton_rhs",
    "variational_residual",
    "History",
    "IntegratorConfig",
    "SimulationResult",
    "integrate_second_order",
    "integrate_hamilton",
    "integrate_fractional_abm",
    "convergence_study",
]

__version__ = "0.1.0"
