"""
Solver options, status codes and the backend-independent result record.
"""

from dataclasses import dataclass, field
from enum import Enum
from typing import Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator

from src.config import Config

SUPPORTED_BACKENDS = ("CLARABEL", "ECOS", "SCS")


class SolverOptions(BaseModel):
    model_config = ConfigDict(frozen=True)

    feas_tol: float = Field(default=Config.FEAS_TOL, gt=0)
    gap_tol: float = Field(default=Config.GAP_TOL, gt=0)
    max_iters: int = Field(default=Config.MAX_ITERS, ge=1)
    verbose: bool = False
    backend: str = Config.SOLVER_BACKEND
    # Treat "solved to reduced accuracy" as Optimal
    accept_inaccurate: bool = False

    @field_validator("backend")
    @classmethod
    def _known_backend(cls, value: str) -> str:
        value = value.upper()
        if value not in SUPPORTED_BACKENDS:
            raise ValueError(f"backend must be one of {SUPPORTED_BACKENDS}, got {value}")
        return value


class SolveStatus(str, Enum):
    OPTIMAL = "Optimal"
    PRIMAL_INFEASIBLE = "PrimalInfeasible"
    DUAL_INFEASIBLE = "DualInfeasible"
    ITERATION_LIMIT = "IterationLimit"
    NUMERICAL_ERROR = "NumericalError"


@dataclass(frozen=True)
class ConeDual:
    """Dual of one rotated-cone block: (s_u, s_v, s_w) with s_w of shape (K, w_dim)."""
    s_u: np.ndarray
    s_v: np.ndarray
    s_w: np.ndarray


@dataclass(frozen=True)
class Duals:
    """
    Multipliers of the Lagrangian

        f(x) + eq.(A x - b) + ineq.(G x - h) + lower.(lb - x) + upper.(x - ub) - sum_k cone_k.(u, v, w)_k
    """
    eq: np.ndarray
    ineq: np.ndarray
    lower: np.ndarray
    upper: np.ndarray
    cones: Tuple[ConeDual, ...] = ()


@dataclass(frozen=True)
class SolverResult:
    status: SolveStatus
    x: np.ndarray
    objective: float
    duals: Duals
    iterations: int = 0
    solve_time: float = 0.0
    backend: str = ""
    log: str = field(default="", repr=False)

    @property
    def optimal(self) -> bool:
        return self.status == SolveStatus.OPTIMAL
