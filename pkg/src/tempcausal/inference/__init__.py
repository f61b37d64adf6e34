"""Joint temporal/causal inference: model building and solvers."""

from .bnb import solve_exact
from .brute import TooLargeError, solve_bruteforce
from .ilp import (
    FULL,
    LOCAL,
    ConstraintConfig,
    IlpModel,
    InfeasibleError,
    ModelError,
    Pin,
    Row,
    Solution,
    build_model,
    resolve_causal_pins,
    resolve_temporal_pins,
)
from .local import solve_local


def infer(doc, cfg=FULL):
    """Build the program for ``doc`` under ``cfg`` and solve it exactly."""
    return solve_exact(build_model(doc, cfg))


__all__ = [
    "FULL", "LOCAL", "ConstraintConfig", "IlpModel", "InfeasibleError", "ModelError",
    "Pin", "Row", "Solution", "TooLargeError", "build_model", "infer",
    "resolve_causal_pins", "resolve_temporal_pins", "solve_bruteforce", "solve_exact",
    "solve_local",
]
