"""
Conic backend built on cvxpy. Clarabel is the default solver; ECOS and SCS are selectable.

Rotated cones 2uv >= |w|^2 are passed as standard second-order cones
|(u - v, sqrt(2) w)| <= u + v, and their duals are mapped back to the rotated form.
"""

import contextlib
import io
import os
import sys
import tempfile
import time
from typing import Dict, Iterator, List

import numpy as np

try:
    import cvxpy as cp
except ImportError:
    raise ImportError("cvxpy not found. Please install cvxpy and clarabel")

from src.model.program import ConicProgram, RotatedConeBlock
from src.solver.options import ConeDual, Duals, SolverOptions, SolverResult, SolveStatus
from src.utils.logger import setup_logger

logger = setup_logger(__name__)

SQRT2 = np.sqrt(2.0)

_STATUS_MAP = {
    cp.OPTIMAL: SolveStatus.OPTIMAL,
    cp.INFEASIBLE: SolveStatus.PRIMAL_INFEASIBLE,
    cp.INFEASIBLE_INACCURATE: SolveStatus.PRIMAL_INFEASIBLE,
    cp.UNBOUNDED: SolveStatus.DUAL_INFEASIBLE,
    cp.UNBOUNDED_INACCURATE: SolveStatus.DUAL_INFEASIBLE,
    cp.USER_LIMIT: SolveStatus.ITERATION_LIMIT,
}


def solver_settings(opts: SolverOptions) -> Dict[str, object]:
    """Translate the generic tolerances into the selected solver's keyword arguments."""
    if opts.backend == "CLARABEL":
        return {"tol_feas": opts.feas_tol, "tol_gap_abs": opts.gap_tol, "tol_gap_rel": opts.gap_tol,
                "max_iter": opts.max_iters}
    if opts.backend == "ECOS":
        return {"feastol": opts.feas_tol, "abstol": opts.gap_tol, "reltol": opts.gap_tol,
                "max_iters": opts.max_iters}
    return {"eps_abs": opts.feas_tol, "eps_rel": opts.gap_tol, "max_iters": opts.max_iters}


@contextlib.contextmanager
def _captured_stdout(enabled: bool) -> Iterator[List[str]]:
    """
    Capture both sys.stdout (cvxpy's own log) and file-descriptor 1 (native solver output).

    The sink receives one string: the Python-level text followed by the native text.
    """
    sink: List[str] = []
    if not enabled:
        yield sink
        return
    with tempfile.TemporaryFile(mode="w+b") as tmp, io.StringIO() as buffer:
        sys.stdout.flush()
        saved = os.dup(1)
        try:
            os.dup2(tmp.fileno(), 1)
            with contextlib.redirect_stdout(buffer):
                yield sink
        finally:
            sys.stdout.flush()
            os.dup2(saved, 1)
            os.close(saved)
            tmp.seek(0)
            sink.append(buffer.getvalue() + tmp.read().decode("utf-8", errors="replace"))


def _affine(rows, x):
    return rows.matrix @ x + rows.offset


def _cone_constraint(block: RotatedConeBlock, x) -> "cp.constraints.SOC":
    u = _affine(block.u, x)
    v = _affine(block.v, x)
    stacked = cp.vstack([u - v] + [SQRT2 * _affine(wk, x) for wk in block.w])
    return cp.SOC(u + v, stacked, axis=0)


def _cone_dual(con, block: RotatedConeBlock) -> ConeDual:
    k = block.n_cones
    if con is None or con.dual_value is None:
        return ConeDual(np.zeros(k), np.zeros(k), np.zeros((k, block.w_dim)))
    dt, dx = con.dual_value
    dt = np.asarray(dt, dtype=float).reshape(k)
    dx = np.asarray(dx, dtype=float).reshape(1 + block.w_dim, k)
    return ConeDual(s_u=dt + dx[0], s_v=dt - dx[0], s_w=SQRT2 * dx[1:].T)


def _bound_duals(con, index: np.ndarray, n: int) -> np.ndarray:
    out = np.zeros(n)
    if con is not None and con.dual_value is not None:
        out[index] = np.asarray(con.dual_value, dtype=float).reshape(-1)
    return out


def _row_duals(con, m: int) -> np.ndarray:
    if con is None or con.dual_value is None:
        return np.zeros(m)
    return np.asarray(con.dual_value, dtype=float).reshape(m)


def solve(prog: ConicProgram, opts: SolverOptions = SolverOptions()) -> SolverResult:
    """
    Solve a ConicProgram.

    Args:
        prog (ConicProgram): Program to solve.
        opts (SolverOptions): Tolerances, iteration cap, backend and verbosity.

    Returns:
        SolverResult: Status, primal vector, objective and duals mapped to the program's
            Lagrangian sign conventions. Backend exceptions surface as NumericalError.
    """
    n = prog.n_vars
    x = cp.Variable(n)

    quad = np.flatnonzero(prog.curvature)
    objective = prog.linear @ x + prog.constant
    if quad.size:
        objective = objective + cp.sum(cp.multiply(prog.curvature[quad], cp.square(x[quad])))

    eq_con = prog.a_eq @ x == prog.b_eq if prog.n_eq else None
    ineq_con = prog.a_ineq @ x <= prog.b_ineq if prog.n_ineq else None
    lo_idx = np.flatnonzero(np.isfinite(prog.lower))
    up_idx = np.flatnonzero(np.isfinite(prog.upper))
    lo_con = x[lo_idx] >= prog.lower[lo_idx] if lo_idx.size else None
    up_con = x[up_idx] <= prog.upper[up_idx] if up_idx.size else None
    cone_cons = [_cone_constraint(block, x) if block.n_cones else None for block in prog.cones]

    constraints = [c for c in (eq_con, ineq_con, lo_con, up_con, *cone_cons) if c is not None]
    problem = cp.Problem(cp.Minimize(objective), constraints)

    logger.debug(f"Solving program with {n} variables via {opts.backend}")
    start = time.perf_counter()
    with _captured_stdout(opts.verbose) as captured:
        try:
            problem.solve(solver=getattr(cp, opts.backend), verbose=opts.verbose, **solver_settings(opts))
            raw_status = problem.status
        except cp.SolverError as e:
            logger.error(f"{opts.backend} failed: {e}")
            raw_status = None
    elapsed = time.perf_counter() - start
    log = captured[0] if captured else ""

    if raw_status in (cp.OPTIMAL_INACCURATE,):
        status = SolveStatus.OPTIMAL if opts.accept_inaccurate else SolveStatus.NUMERICAL_ERROR
    else:
        status = _STATUS_MAP.get(raw_status, SolveStatus.NUMERICAL_ERROR)

    if x.value is None:
        primal = np.full(n, np.nan)
        value = float("nan")
    else:
        primal = np.asarray(x.value, dtype=float).reshape(n)
        value = prog.objective(primal)

    duals = Duals(
        eq=_row_duals(eq_con, prog.n_eq),
        ineq=_row_duals(ineq_con, prog.n_ineq),
        lower=_bound_duals(lo_con, lo_idx, n),
        upper=_bound_duals(up_con, up_idx, n),
        cones=tuple(_cone_dual(con, block) for con, block in zip(cone_cons, prog.cones)),
    )

    stats = problem.solver_stats if raw_status is not None else None
    iterations = int(stats.num_iters) if stats is not None and stats.num_iters is not None else 0
    solve_time = float(stats.solve_time) if stats is not None and stats.solve_time is not None else elapsed

    if status == SolveStatus.OPTIMAL:
        logger.info(f"{opts.backend}: {status.value}, objective {value:.6f}, {iterations} iterations, "
                    f"{solve_time:.3f}s")
    else:
        logger.warning(f"{opts.backend}: {status.value} (raw status {raw_status}) after {elapsed:.3f}s")

    return SolverResult(
        status=status,
        x=primal,
        objective=value,
        duals=duals,
        iterations=iterations,
        solve_time=solve_time,
        backend=opts.backend,
        log=log,
    )
