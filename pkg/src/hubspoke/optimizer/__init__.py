"""Exact and heuristic solvers for the route-design MILP."""

from .evaluate import check_design, design_from_sequences, objective_value
from .heuristic import solve_heuristic
from .model import MilpModel, ModelTooLargeError, build_model, count_variables, symmetry_rows
from .search import (
    BoundRecord,
    InfeasibleError,
    SolveBudgetError,
    SolveOptions,
    SolveResult,
    solve_exact,
)
from .simplex import LpResult, SimplexError, solve_lp

__all__ = [
    "BoundRecord",
    "InfeasibleError",
    "LpResult",
    "MilpModel",
    "ModelTooLargeError",
    "SimplexError",
    "SolveBudgetError",
    "SolveOptions",
    "SolveResult",
    "build_model",
    "check_design",
    "count_variables",
    "design_from_sequences",
    "objective_value",
    "solve_exact",
    "solve_heuristic",
    "solve_lp",
    "symmetry_rows",
]
