"""
CSV writers for gap tables, penalty sweeps and penalty-loop traces.

Every CSV starts with one metadata line: "# tolerance=..., xi=..., units=..., version=...".
"""

from pathlib import Path
from typing import Any, Dict, Mapping, Optional, Sequence, Union

import pandas as pd

from src.config import Config
from src.tra.penalty_loop import TraResult
from src.tra.sweeps import PenaltyPoint, SweepTable
from src.utils.file_handling import save_to_file
from src.utils.logger import setup_logger

logger = setup_logger(__name__)


def format_gap(value: Optional[float]) -> str:
    """Three significant digits in scientific notation, e.g. 3.24E-02; FAILED for a missing cell."""
    if value is None or value != value:
        return Config.FAILED_CELL
    return f"{value:.2E}"


def format_level(level: float) -> str:
    return f"{level * 100:g}%"


def metadata_line(meta: Mapping[str, Any]) -> str:
    keys = ("tolerance", "xi", "units", "version")
    fields = [f"{key}={meta[key]}" for key in keys if key in meta]
    # No timestamp in the file header
    fields += [f"{key}={value}" for key, value in meta.items() if key not in keys and key != "timestamp"]
    return "# " + ", ".join(fields)


def _write(frame: pd.DataFrame, meta: Mapping[str, Any], path: Union[str, Path]) -> str:
    content = metadata_line(meta) + "\n" + frame.to_csv(index=False, lineterminator="\n")
    saved = save_to_file(content, path)
    logger.info(f"Wrote {len(frame)} rows to {saved}")
    return saved


def sweep_frame(table: SweepTable) -> pd.DataFrame:
    """Load levels as rows, cases as columns, formatted gap cells."""
    rows = []
    for level in table.levels:
        row: Dict[str, str] = {"load": format_level(level)}
        for case in table.cases:
            row[case] = format_gap(table.value(level, case))
        rows.append(row)
    return pd.DataFrame(rows, columns=["load", *table.cases])


def write_sweep_table(table: SweepTable, path: Union[str, Path]) -> str:
    return _write(sweep_frame(table), {**table.metadata, "metric": table.metric}, path)


def penalty_frame(points: Sequence[PenaltyPoint]) -> pd.DataFrame:
    return pd.DataFrame(
        [{
            "xi": p.xi,
            "gap_po_max": format_gap(None if p.failed else p.gap_po_max),
            "gap_qo_max": format_gap(None if p.failed else p.gap_qo_max),
            "objective": Config.FAILED_CELL if p.failed else f"{p.objective:.6f}",
        } for p in points],
        columns=["xi", "gap_po_max", "gap_qo_max", "objective"],
    )


def write_penalty_sweep(points: Sequence[PenaltyPoint], path: Union[str, Path], tol: float,
                        units: str = "pu", base_mva: float = 1.0) -> str:
    if units == "mva":
        points = [PenaltyPoint(p.xi, p.gap_po_max * base_mva, p.gap_qo_max * base_mva, p.objective,
                               p.reactive_loss * base_mva, p.status) for p in points]
    meta = {"tolerance": tol, "xi": "sweep", "units": units, "version": Config.TOOL_VERSION}
    return _write(penalty_frame(points), meta, path)


def trace_frame(result: TraResult, units: str = "pu", base_mva: float = 1.0) -> pd.DataFrame:
    scale = base_mva if units == "mva" else 1.0
    return pd.DataFrame(
        [{
            "k": it.k,
            "xi": f"{it.xi:g}",
            "gap_po_max": format_gap(it.gap_po_max * scale),
            "gap_qo_max": format_gap(it.gap_qo_max * scale),
            "f": f"{it.objective:.6f}",
            "f_M": f"{it.objective_penalized:.6f}",
        } for it in result.iterates],
        columns=["k", "xi", "gap_po_max", "gap_qo_max", "f", "f_M"],
    )


def write_trace(result: TraResult, path: Union[str, Path], tol: float,
                units: str = "pu", base_mva: float = 1.0) -> str:
    meta = {"tolerance": tol, "xi": f"{result.xi_last:g}", "units": units, "version": Config.TOOL_VERSION,
            "converged": result.converged}
    return _write(trace_frame(result, units, base_mva), meta, path)
