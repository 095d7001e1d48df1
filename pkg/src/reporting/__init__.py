from src.reporting.tables import (
    format_gap, format_level, metadata_line, penalty_frame, sweep_frame, trace_frame,
    write_penalty_sweep, write_sweep_table, write_trace,
)

__all__ = [
    "format_gap",
    "format_level",
    "metadata_line",
    "penalty_frame",
    "sweep_frame",
    "trace_frame",
    "write_penalty_sweep",
    "write_sweep_table",
    "write_trace",
]
