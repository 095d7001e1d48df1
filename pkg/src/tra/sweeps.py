"""
Penalty-coefficient and load-level sweeps.

Cells are independent solves dispatched to a bounded thread pool; results are
assembled in input order (penalty sweep) or sorted by (case, load level) (load sweep).
A failed cell is recorded and the sweep continues.
"""

from concurrent.futures import ThreadPoolExecutor, as_completed
from dataclasses import dataclass, field
from datetime import datetime, timezone
from typing import Callable, Dict, List, Optional, Sequence, Tuple, TypeVar

import numpy as np
from tqdm import tqdm

from src.config import Config
from src.errors import SocOpfError
from src.feasibility.gaps import GapReport
from src.model.builder import PenaltySpec, PenaltyTarget
from src.network.network_model import Network, scale_loads
from src.solver.options import SolverOptions
from src.tra.penalty_loop import fixed_penalty_run, solve_case
from src.utils.logger import setup_logger

logger = setup_logger(__name__)

T = TypeVar("T")


@dataclass(frozen=True)
class PenaltyPoint:
    xi: float
    gap_po_max: float
    gap_qo_max: float
    objective: float
    reactive_loss: float = float("nan")
    status: str = "Optimal"

    @property
    def failed(self) -> bool:
        return self.status != "Optimal"


@dataclass(frozen=True)
class LoadCell:
    case: str
    load_level: float
    report: Optional[GapReport]
    objective: float = float("nan")
    status: str = "Optimal"

    @property
    def failed(self) -> bool:
        return self.report is None


@dataclass(frozen=True)
class SweepTable:
    """One gap metric over load levels (rows) and cases (columns); None marks a failed cell."""
    metric: str
    levels: Tuple[float, ...]
    cases: Tuple[str, ...]
    cells: Dict[Tuple[float, str], Optional[float]]
    metadata: Dict[str, object] = field(default_factory=dict)

    def value(self, level: float, case: str) -> Optional[float]:
        return self.cells.get((level, case))

    @property
    def n_failed(self) -> int:
        return sum(1 for v in self.cells.values() if v is None)


def _run_pool(jobs: Sequence[Callable[[], T]], max_workers: int, desc: str) -> List[T]:
    """Run jobs on a bounded pool; results in job order."""
    results: List[Optional[T]] = [None] * len(jobs)
    if max_workers <= 1 or len(jobs) <= 1:
        for i, job in enumerate(tqdm(jobs, desc=desc, unit="solve", disable=len(jobs) <= 1)):
            results[i] = job()
        return results

    with ThreadPoolExecutor(max_workers=max_workers) as pool:
        futures = {pool.submit(job): i for i, job in enumerate(jobs)}
        for future in tqdm(as_completed(futures), total=len(futures), desc=desc, unit="solve"):
            results[futures[future]] = future.result()
    return results


def penalty_sweep(net: Network, xis: Sequence[float], solver_opts: SolverOptions = SolverOptions(),
                  target: PenaltyTarget = "reactive", tol: float = Config.GAP_TOL_PU,
                  max_workers: int = 1) -> List[PenaltyPoint]:
    """
    One independent penalized solve per xi.

    Args:
        net (Network): Network at the desired load level.
        xis (Sequence[float]): Penalty coefficients, each >= 0.
        solver_opts (SolverOptions): Options for every solve.
        target (str): Penalty target.
        tol (float): Gap tolerance (p.u.).
        max_workers (int): Pool size; 1 solves sequentially.

    Returns:
        List[PenaltyPoint]: One point per xi, in input order. Failed solves carry NaN values
            and the solver status.
    """
    if not xis:
        raise ValueError("Penalty sweep needs at least one xi value")
    if any(xi < 0 for xi in xis):
        raise ValueError(f"Penalty coefficients must be >= 0, got {list(xis)}")
    if solver_opts.verbose:
        max_workers = 1

    def job(xi: float) -> Callable[[], PenaltyPoint]:
        def run() -> PenaltyPoint:
            try:
                solved = solve_case(net, PenaltySpec(xi=xi, target=target), solver_opts, tol=tol)
            except SocOpfError as e:
                logger.warning(f"{net.name}: penalty sweep entry xi={xi:g} failed: {e}")
                nan = float("nan")
                return PenaltyPoint(xi, nan, nan, nan, nan, status=getattr(e, "status", None) or type(e).__name__)
            return PenaltyPoint(
                xi=xi,
                gap_po_max=solved.report.gap_po_max,
                gap_qo_max=solved.report.gap_qo_max,
                objective=solved.solution.objective,
                reactive_loss=solved.solution.total_losses[1],
            )
        return run

    points = _run_pool([job(float(xi)) for xi in xis], max_workers, desc=f"{net.name} penalty sweep")
    logger.info(f"{net.name}: penalty sweep over {len(points)} values, "
                f"{sum(p.failed for p in points)} failed")
    return points


def load_sweep(networks: Sequence[Network], grid: Sequence[float] = Config.LOAD_GRID, xi: float = 0.0,
               solver_opts: SolverOptions = SolverOptions(), target: PenaltyTarget = "reactive",
               tol: float = Config.GAP_TOL_PU, max_workers: int = Config.MAX_WORKERS) -> List[LoadCell]:
    """
    Solve every (case, load level) cell with the same penalty.

    Returns:
        List[LoadCell]: Cells sorted by (case order, load level).
    """
    if not networks:
        raise ValueError("Load sweep needs at least one case")
    if not grid or any(not 0 < level <= 10 for level in grid):
        raise ValueError(f"Load grid factors must lie in (0, 10], got {list(grid)}")
    if solver_opts.verbose:
        max_workers = 1

    # Fail fast on a bad xi or target
    PenaltySpec(xi=xi, target=target)

    def job(net: Network, level: float) -> Callable[[], LoadCell]:
        def run() -> LoadCell:
            try:
                solved = fixed_penalty_run(scale_loads(net, level), xi, solver_opts, target=target, tol=tol)
            except SocOpfError as e:
                logger.warning(f"{net.name} at load {level:.0%}: {e}")
                return LoadCell(net.name, level, None, status=getattr(e, "status", None) or type(e).__name__)
            return LoadCell(net.name, level, solved.report, objective=solved.solution.objective)
        return run

    order = [(c, level) for c in range(len(networks)) for level in sorted(grid)]
    cells = _run_pool([job(networks[c], level) for c, level in order], max_workers, desc="Load sweep")
    logger.info(f"Load sweep: {len(cells)} cells, {sum(c.failed for c in cells)} failed")
    return cells


def sweep_tables(cells: Sequence[LoadCell], xi: float, tol: float = Config.GAP_TOL_PU,
                 units: str = "pu", base_mva: Optional[Dict[str, float]] = None) -> Tuple[SweepTable, SweepTable]:
    """Split load-sweep cells into the active-gap and reactive-gap tables."""
    cases = tuple(dict.fromkeys(c.case for c in cells))
    levels = tuple(sorted({c.load_level for c in cells}))
    base_mva = base_mva or {}
    metadata = {
        "tolerance": tol,
        "xi": xi,
        "units": units,
        "version": Config.TOOL_VERSION,
        "timestamp": datetime.now(timezone.utc).strftime("%Y-%m-%dT%H:%M:%SZ"),
    }

    def cell_value(cell: LoadCell, attr: str) -> Optional[float]:
        if cell.report is None:
            return None
        scale = base_mva.get(cell.case, 1.0) if units == "mva" else 1.0
        return float(getattr(cell.report, attr) * scale)

    tables = []
    for metric, attr in (("active", "gap_po_max"), ("reactive", "gap_qo_max")):
        values = {(c.load_level, c.case): cell_value(c, attr) for c in cells}
        tables.append(SweepTable(metric, levels, cases, values, dict(metadata)))
    return tables[0], tables[1]


def is_monotone(values: Sequence[float], increasing: bool, slack: float = 1e-6) -> bool:
    """Check monotonicity with a relative slack of slack * (1 + |value|)."""
    arr = np.asarray(values, dtype=float)
    steps = np.diff(arr) if increasing else -np.diff(arr)
    allowance = slack * (1.0 + np.abs(arr[1:]))
    return bool(np.all(steps >= -allowance))
