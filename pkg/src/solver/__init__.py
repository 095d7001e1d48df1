"""
Conic solver contract: options, cvxpy backend and independent KKT check.
"""

from src.solver.options import ConeDual, Duals, SolverOptions, SolverResult, SolveStatus
from src.solver.cvxpy_backend import solve
from src.solver.kkt import Residuals, kkt_residuals

__all__ = [
    "ConeDual",
    "Duals",
    "SolverOptions",
    "SolverResult",
    "SolveStatus",
    "solve",
    "Residuals",
    "kkt_residuals",
]
