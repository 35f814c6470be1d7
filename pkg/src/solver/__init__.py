from .coefficients import ControlPair, CoeffTable, CONTROL_SET, precompute_coeffs
from .hjb_solver import (
    SolverParams,
    SolveResult,
    ConfigurationError,
    SWEEP_DIRECTIONS,
    local_update,
    sweep,
    solve,
)

__all__ = [
    "ControlPair",
    "CoeffTable",
    "CONTROL_SET",
    "precompute_coeffs",
    "SolverParams",
    "SolveResult",
    "ConfigurationError",
    "SWEEP_DIRECTIONS",
    "local_update",
    "sweep",
    "solve",
]
