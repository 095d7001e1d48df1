"""
Tightness reinforcement: loss-penalized solves and the heuristic penalty loop.

The loop solves with the current penalty xi, records the gap maxima, then increments
xi by dxi and the counter k, and repeats while either gap is above its tolerance and
fewer than k_max solves have been made.
"""

from dataclasses import dataclass, field
from typing import List, Optional, Tuple

from pydantic import BaseModel, ConfigDict, Field

from src.config import Config
from src.errors import SolveFailedError
from src.feasibility.gaps import GapReport, line_gaps
from src.model.builder import LossSide, PenaltySpec, PenaltyTarget, build_socp
from src.model.program import ConicProgram
from src.model.solution import OpfSolution, extract_solution
from src.model.variables import VariableMap
from src.network.network_model import Network
from src.solver.cvxpy_backend import solve
from src.solver.options import SolverOptions, SolverResult
from src.utils.logger import setup_logger

logger = setup_logger(__name__)


class TraOptions(BaseModel):
    model_config = ConfigDict(frozen=True)

    xi0: float = Field(default=Config.TRA_XI0, gt=0.0, lt=1.0)
    dxi: float = Field(default=Config.TRA_DXI, gt=0.0, le=0.5)
    gap_tol_po: float = Field(default=Config.GAP_TOL_PU, gt=0.0)
    gap_tol_qo: float = Field(default=Config.GAP_TOL_PU, gt=0.0)
    k_max: int = Field(default=Config.TRA_K_MAX, ge=1)
    target: PenaltyTarget = "reactive"
    loss_side: LossSide = "sending"


@dataclass(frozen=True)
class CaseSolve:
    """One build-solve-decode-evaluate pass over a network."""
    program: ConicProgram
    vmap: VariableMap
    result: SolverResult
    solution: OpfSolution
    report: GapReport
    penalty: PenaltySpec


@dataclass(frozen=True)
class TraIterate:
    k: int
    xi: float
    objective: float
    objective_penalized: float
    gap_po_max: float
    gap_qo_max: float
    iterations: int = 0
    solve_time: float = 0.0


@dataclass(frozen=True)
class TraResult:
    iterates: Tuple[TraIterate, ...]
    solution: OpfSolution
    report: GapReport
    converged: bool
    xi_last: float
    xi_final: float
    solver_log: str = field(default="", repr=False)

    @property
    def n_solves(self) -> int:
        return len(self.iterates)


def solve_case(net: Network, penalty: PenaltySpec = PenaltySpec(),
               solver_opts: SolverOptions = SolverOptions(),
               tol: float = Config.GAP_TOL_PU, loss_side: LossSide = "sending") -> CaseSolve:
    """
    Build, solve and evaluate the SOC program of a network.

    Raises:
        SolveFailedError: The backend returned a non-Optimal status.
    """
    prog, vmap = build_socp(net, penalty, loss_side=loss_side)
    result = solve(prog, solver_opts)
    if not result.optimal:
        raise SolveFailedError(
            f"{net.name} (load x{net.load_factor:g}, xi={penalty.xi:g}): solver returned {result.status.value}",
            status=result.status.value,
        )
    solution = extract_solution(result.x, vmap, net, penalty)
    report = line_gaps(solution, net, tol=tol, side=loss_side)
    logger.info(f"{net.name} (load x{net.load_factor:g}, xi={penalty.xi:g}): f={solution.objective:.4f}, "
                f"gap_po_max={report.gap_po_max:.3E}, gap_qo_max={report.gap_qo_max:.3E}")
    return CaseSolve(prog, vmap, result, solution, report, penalty)


def fixed_penalty_run(net: Network, xi: float = Config.DEFAULT_XI,
                      solver_opts: SolverOptions = SolverOptions(),
                      target: PenaltyTarget = "reactive",
                      tol: float = Config.GAP_TOL_PU) -> CaseSolve:
    """Single penalized solve at a fixed xi (0.3 by default)."""
    return solve_case(net, PenaltySpec(xi=xi, target=target), solver_opts, tol=tol)


def run_tra(net: Network, opts: TraOptions = TraOptions(),
            solver_opts: SolverOptions = SolverOptions()) -> TraResult:
    """
    Run the heuristic penalty loop.

    Args:
        net (Network): Network at the desired load level.
        opts (TraOptions): Initial penalty, increment, tolerances and iteration cap.
        solver_opts (SolverOptions): Options passed to every solve.

    Returns:
        TraResult: Trace of every solve, the last solution (objective unpenalized), the
            penalty used by the last solve (xi_last) and the incremented one (xi_final).

    Raises:
        SolveFailedError: A solve was not Optimal; `trace` holds the iterates so far.
    """
    xi = opts.xi0
    k = 1
    iterates: List[TraIterate] = []
    logs: List[str] = []
    last: Optional[CaseSolve] = None
    tol = min(opts.gap_tol_po, opts.gap_tol_qo)

    while True:
        penalty = PenaltySpec(xi=xi, target=opts.target)
        try:
            last = solve_case(net, penalty, solver_opts, tol=tol, loss_side=opts.loss_side)
        except SolveFailedError as e:
            logger.error(f"Penalty loop aborted at k={k}, xi={xi:g}: {e}")
            raise SolveFailedError(str(e), status=e.status, trace=iterates) from e

        report = last.report
        iterates.append(TraIterate(
            k=k,
            xi=xi,
            objective=last.solution.objective,
            objective_penalized=last.solution.objective_penalized,
            gap_po_max=report.gap_po_max,
            gap_qo_max=report.gap_qo_max,
            iterations=last.result.iterations,
            solve_time=last.result.solve_time,
        ))
        if last.result.log:
            logs.append(f"--- k={k} xi={xi:g} ---\n{last.result.log}")
        logger.info(f"TRA k={k}: xi={xi:g}, gap_po_max={report.gap_po_max:.3E}, "
                    f"gap_qo_max={report.gap_qo_max:.3E}")

        xi_used = xi
        k += 1
        xi = opts.xi0 + (k - 1) * opts.dxi
        loose = report.gap_po_max > opts.gap_tol_po or report.gap_qo_max > opts.gap_tol_qo
        if not (loose and len(iterates) < opts.k_max):
            break

    converged = not loose
    if converged:
        logger.info(f"{net.name}: tight after {len(iterates)} solve(s), last xi={xi_used:g}")
    else:
        logger.warning(f"{net.name}: gaps still loose after {len(iterates)} solve(s) (k_max={opts.k_max})")

    return TraResult(
        iterates=tuple(iterates),
        solution=last.solution,
        report=last.report,
        converged=converged,
        xi_last=xi_used,
        xi_final=xi,
        solver_log="\n".join(logs),
    )
