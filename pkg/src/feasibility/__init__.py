from src.feasibility.gaps import GapReport, balance_residuals, is_ac_feasible, line_gaps

__all__ = ["GapReport", "balance_residuals", "is_ac_feasible", "line_gaps"]
