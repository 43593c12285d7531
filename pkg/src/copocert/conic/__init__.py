"""Conic program representation, embedded LP solver and PSD backends."""

from .program import ConicProgram, ProgramBuilder, SolverResult, residual_report, smat, svec
from .simplex import solve_lp

__all__ = [
    "ConicProgram",
    "ProgramBuilder",
    "SolverResult",
    "residual_report",
    "smat",
    "svec",
    "solve_lp",
]
