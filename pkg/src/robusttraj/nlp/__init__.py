"""Sparse constrained NLP machinery: problem container, interior-point
solver, derivative checking, and the dense LP used by the oracle."""

from .derivcheck import check_derivatives, verify_sparsity
from .ipm import SolveReport, SolverOptions, solve
from .problem import ConstraintBlock, NlpProblem, Objective
from .simplex import LpResult, lp_solve

__all__ = [
    "ConstraintBlock",
    "NlpProblem",
    "Objective",
    "SolveReport",
    "SolverOptions",
    "check_derivatives",
    "verify_sparsity",
    "lp_solve",
    "LpResult",
    "solve",
]
