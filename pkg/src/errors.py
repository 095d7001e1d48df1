"""
Exception hierarchy shared by the case ingestion, model, solver and penalty modules.
"""

from typing import Any, List, Optional


class SocOpfError(Exception):
    """Base class for all errors raised by this package."""
    pass


class ConfigurationError(SocOpfError):
    """Raised when Config holds inconsistent values."""
    pass


# --- Case data ---

class CaseDataError(SocOpfError):
    """Raised when a case file or network violates the data invariants."""
    pass


class MalformedFileError(CaseDataError):
    pass


class MissingSectionError(CaseDataError):
    pass


class UnsupportedCostError(CaseDataError):
    pass


class IslandedNetworkError(CaseDataError):
    pass


class NoSlackError(CaseDataError):
    pass


class MultipleSlackError(CaseDataError):
    pass


class NonPositiveReactanceError(CaseDataError):
    pass


class NonPositiveFactorError(CaseDataError):
    pass


# --- Model ---

class ModelBuildError(SocOpfError):
    """Raised when a conic program cannot be built or decoded."""
    pass


class InfeasibleBoxError(ModelBuildError):
    pass


class NonPositiveVoltageSquareError(ModelBuildError):
    pass


class DimensionMismatchError(SocOpfError):
    pass


# --- Solve ---

class SolveFailedError(SocOpfError):
    """
    Raised when a solve ends with a non-Optimal status.

    Args:
        message (str): Human readable description.
        status (str, optional): Status reported by the backend.
        trace (List[Any], optional): Iterates recorded before the failure (penalty loop).
    """

    def __init__(self, message: str, status: Optional[str] = None, trace: Optional[List[Any]] = None):
        super().__init__(message)
        self.status = status
        self.trace = list(trace or [])
