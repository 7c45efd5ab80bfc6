"""Finite-domain solver for integer flat instances."""

from .kernels import BACKEND
from .search import (
    ALL, AT_FIXPOINT, FAILED, OPTIMAL, SATISFIED, UNKNOWN, UNSAT, Result, SearchStats, Solution,
    Solver, UnsupportedConstraint, VerificationError, solve_text,
)
from .store import IntDomain

__all__ = [
    "ALL", "AT_FIXPOINT", "BACKEND", "FAILED", "IntDomain", "OPTIMAL", "Result", "SATISFIED",
    "SearchStats", "Solution", "Solver", "UNKNOWN", "UNSAT", "UnsupportedConstraint",
    "VerificationError", "solve_text",
]
