"""
Tightness reinforcement: penalty loop and sweeps.
"""

from src.tra.penalty_loop import (
    CaseSolve, TraIterate, TraOptions, TraResult, fixed_penalty_run, run_tra, solve_case,
)
from src.tra.sweeps import (
    LoadCell, PenaltyPoint, SweepTable, is_monotone, load_sweep, penalty_sweep, sweep_tables,
)

__all__ = [
    "CaseSolve",
    "TraIterate",
    "TraOptions",
    "TraResult",
    "fixed_penalty_run",
    "run_tra",
    "solve_case",
    "LoadCell",
    "PenaltyPoint",
    "SweepTable",
    "is_monotone",
    "load_sweep",
    "penalty_sweep",
    "sweep_tables",
]
