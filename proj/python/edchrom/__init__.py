"""Equilibrium-dispersive chromatography solver (Python bindings)."""

from ._edchrom import (
    IsothermModel,
    RunResult,
    Snapshot,
    ConvergenceError,
    SCHEMES,
    convergence_order,
    experiment_config,
    forward,
    inverse,
    l1_error,
    restrict_reference,
    run_config,
    trimmed_l1_error,
)

__all__ = [
    "IsothermModel",
    "RunResult",
    "Snapshot",
    "ConvergenceError",
    "SCHEMES",
    "convergence_order",
    "experiment_config",
    "forward",
    "inverse",
    "l1_error",
    "restrict_reference",
    "run_config",
    "trimmed_l1_error",
]
