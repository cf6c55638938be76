"""Polynomial constraint solving and optimization with Bernstein range enclosures."""

from .bernstein import bound_range, fast_minmax
from .optimizer import OptimizerConfig, optimize, optimize_objective
from .parser import ParseError, parse_expr, parse_problem, parse_problem_text
from .poly import Box, Polynomial
from .solver import BranchPrune, ExternalSMT, SolverConfig, Status, solve, solve_constraints

__all__ = [
    "Box", "BranchPrune", "ExternalSMT", "OptimizerConfig", "ParseError", "Polynomial", "SolverConfig",
    "Status", "bound_range", "fast_minmax", "optimize", "optimize_objective", "parse_expr", "parse_problem",
    "parse_problem_text", "solve", "solve_constraints",
]

__version__ = "0.1.0"
