#!/usr/bin/env python3
"""
SOC-ACOPF Tightness - Command Line Entry Point

Commands:
    solve          single SOC-ACOPF solve at one load level and penalty
    sweep-load     relaxation-gap tables over a load grid for one or more cases
    tra            heuristic penalty loop until both gaps are within tolerance
    sweep-penalty  gaps and objective over a grid of penalty coefficients

Exit codes: 0 success, 2 usage/file/data error, 3 solver failure, 4 penalty loop not converged.
"""

import argparse
import sys
from pathlib import Path
from typing import List, Optional, Sequence

from src.config import Config
from src.errors import CaseDataError, ConfigurationError, ModelBuildError, SocOpfError, SolveFailedError
from src.feasibility.gaps import is_ac_feasible
from src.model.builder import PenaltySpec
from src.model.program import dump_program
from src.network.bundled_cases import load_case
from src.network.network_model import Network, scale_loads
from src.reporting.tables import format_gap, write_penalty_sweep, write_sweep_table, write_trace
from src.solver.kkt import kkt_residuals
from src.solver.options import SolverOptions
from src.tra.penalty_loop import TraOptions, run_tra, solve_case
from src.tra.sweeps import load_sweep, penalty_sweep, sweep_tables
from src.utils.file_handling import artifact_name, ensure_directory, save_json, save_to_file
from src.utils.logger import set_level, setup_logger

logger = setup_logger("socopf.cli")

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_SOLVER = 3
EXIT_NOT_CONVERGED = 4


class UsageError(Exception):
    pass


def parse_grid(text: Optional[str], default: Sequence[float] = ()) -> List[float]:
    """Parse "0.05,0.1,..." into floats; None yields the default."""
    if text is None:
        return list(default)
    try:
        return [float(item) for item in text.split(",") if item.strip()]
    except ValueError as e:
        raise UsageError(f"Invalid grid '{text}': {e}") from e


def _solver_options(args: argparse.Namespace) -> SolverOptions:
    return SolverOptions(verbose=args.solver_log, backend=args.backend)


def _load(case: str, load: float) -> Network:
    net = load_case(case)
    return scale_loads(net, load)


def _stem(net: Network, *parts: str) -> str:
    return artifact_name(net.name, f"load{net.load_factor * 100:g}", *parts)


def cmd_solve(args: argparse.Namespace) -> int:
    net = _load(args.case, args.load)
    out_dir = Path(args.out)
    penalty = PenaltySpec(xi=args.xi, target=args.target)

    solved = solve_case(net, penalty, _solver_options(args), tol=args.gap_tol, loss_side=args.side)
    residuals = kkt_residuals(solved.program, solved.result)
    stem = _stem(net, f"xi{args.xi:g}")

    if args.dump_program:
        dump_program(solved.program, out_dir / f"{stem}_program.json")
    if args.solver_log and solved.result.log:
        save_to_file(solved.result.log, out_dir / f"{stem}_solver.log")

    report = {
        "case": net.name,
        "load_factor": net.load_factor,
        "network": net.summary(),
        "penalty": {"xi": penalty.xi, "target": penalty.target},
        "f": solved.solution.objective,
        "f_M": solved.solution.objective_penalized,
        "solver": {
            "backend": solved.result.backend,
            "status": solved.result.status.value,
            "iterations": solved.result.iterations,
            "solve_time": solved.result.solve_time,
        },
        "kkt": residuals.to_dict(),
        "ac_feasible": is_ac_feasible(solved.report, args.gap_tol),
        "gaps": solved.report.to_dict(net.base_mva, args.units),
        "solution": solved.solution.to_dict(net.base_mva, args.units),
    }
    path = save_json(report, out_dir / f"{stem}_solution.json")

    scale = net.base_mva if args.units == "mva" else 1.0
    print(f"Objective f:        {solved.solution.objective:.6f} $/h")
    if penalty.xi > 0:
        print(f"Penalized f^M:      {solved.solution.objective_penalized:.6f}")
    print(f"gap_po_max ({args.units}):  {format_gap(solved.report.gap_po_max * scale)}")
    print(f"gap_qo_max ({args.units}):  {format_gap(solved.report.gap_qo_max * scale)}")
    print(f"Report saved to:    {path}")
    return EXIT_OK


def cmd_sweep_load(args: argparse.Namespace) -> int:
    if not args.case:
        raise UsageError("sweep-load needs at least one --case")
    grid = parse_grid(args.grid, Config.LOAD_GRID)
    if not grid or any(not 0 < level <= 10 for level in grid):
        raise UsageError(f"Load grid factors must lie in (0, 10], got {grid}")

    networks = [load_case(case) for case in args.case]
    cells = load_sweep(networks, grid, xi=args.xi, solver_opts=_solver_options(args), target=args.target,
                       tol=args.gap_tol, max_workers=args.threads)
    active, reactive = sweep_tables(cells, xi=args.xi, tol=args.gap_tol, units=args.units,
                                    base_mva={net.name: net.base_mva for net in networks})

    out_dir = Path(args.out)
    suffix = f"xi{args.xi:g}"
    paths = [
        write_sweep_table(active, out_dir / f"load_sweep_active_{suffix}.csv"),
        write_sweep_table(reactive, out_dir / f"load_sweep_reactive_{suffix}.csv"),
    ]
    failed = sum(cell.failed for cell in cells)
    print(f"Cells solved:       {len(cells) - failed}/{len(cells)}")
    for path in paths:
        print(f"Table saved to:     {path}")
    return EXIT_SOLVER if failed == len(cells) else EXIT_OK


def cmd_tra(args: argparse.Namespace) -> int:
    net = _load(args.case, args.load)
    opts = TraOptions(xi0=args.xi0, dxi=args.dxi, gap_tol_po=args.gap_tol, gap_tol_qo=args.gap_tol,
                      k_max=args.kmax, target=args.target, loss_side=args.side)
    out_dir = Path(args.out)

    result = run_tra(net, opts, _solver_options(args))
    stem = _stem(net, "tra")
    trace_path = write_trace(result, out_dir / f"{stem}_trace.csv", tol=args.gap_tol,
                             units=args.units, base_mva=net.base_mva)
    solution_path = save_json({
        "case": net.name,
        "load_factor": net.load_factor,
        "converged": result.converged,
        "solves": result.n_solves,
        "xi_last": result.xi_last,
        "xi_final": result.xi_final,
        "f": result.solution.objective,
        "f_M": result.solution.objective_penalized,
        "gaps": result.report.to_dict(net.base_mva, args.units),
        "solution": result.solution.to_dict(net.base_mva, args.units),
    }, out_dir / f"{stem}_solution.json")
    if args.solver_log and result.solver_log:
        save_to_file(result.solver_log, out_dir / f"{stem}_solver.log")

    print(f"Solves:             {result.n_solves}")
    print(f"Last xi used:       {result.xi_last:g}")
    print(f"Converged:          {result.converged}")
    print(f"Trace saved to:     {trace_path}")
    print(f"Solution saved to:  {solution_path}")
    return EXIT_OK if result.converged else EXIT_NOT_CONVERGED


def cmd_sweep_penalty(args: argparse.Namespace) -> int:
    xis = parse_grid(args.grid)
    if not xis:
        raise UsageError("sweep-penalty needs a non-empty --grid of xi values")
    if any(xi < 0 for xi in xis):
        raise UsageError(f"Penalty coefficients must be >= 0, got {xis}")

    net = _load(args.case, args.load)
    points = penalty_sweep(net, xis, _solver_options(args), target=args.target, tol=args.gap_tol,
                           max_workers=args.threads)
    path = write_penalty_sweep(points, Path(args.out) / f"{_stem(net, 'penalty_sweep')}.csv",
                               tol=args.gap_tol, units=args.units, base_mva=net.base_mva)
    print(f"Entries solved:     {sum(not p.failed for p in points)}/{len(points)}")
    print(f"Series saved to:    {path}")
    return EXIT_SOLVER if all(p.failed for p in points) else EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--units", choices=("pu", "mva"), default="pu", help="Units of reported gaps and flows")
    common.add_argument("--out", default=str(Config.OUTPUT_DIR), help="Output directory")
    common.add_argument("--gap-tol", type=float, default=Config.GAP_TOL_PU, help="Gap tolerance in p.u.")
    common.add_argument("--target", choices=("reactive", "active_plus_reactive"), default="reactive",
                        help="Losses entering the penalty term")
    common.add_argument("--backend", choices=("CLARABEL", "ECOS", "SCS"), default=Config.SOLVER_BACKEND)
    common.add_argument("--threads", type=int, default=Config.MAX_WORKERS, help="Worker pool size for sweeps")
    common.add_argument("--solver-log", action="store_true", help="Write the solver's iteration log")
    common.add_argument("--seed-free", action="store_true", help="Reserved; nothing is randomized")
    common.add_argument("--verbose", action="store_true", help="Debug logging")

    parser = argparse.ArgumentParser(description="SOC-ACOPF relaxation gaps and tightness reinforcement")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("solve", parents=[common], help="Single SOC-ACOPF solve")
    p.add_argument("--case", required=True, help="MATPOWER file or bundled case name")
    p.add_argument("--load", type=float, default=1.0, help="Load factor (1.0 = file loads)")
    p.add_argument("--xi", type=float, default=0.0, help="Loss penalty coefficient")
    p.add_argument("--side", choices=("sending", "receiving"), default="sending")
    p.add_argument("--dump-program", action="store_true", help="Write the conic program as JSON")
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("sweep-load", parents=[common], help="Gap tables over a load grid")
    p.add_argument("--case", nargs="+", default=[], help="Case files or bundled names")
    p.add_argument("--grid", help="Comma separated load factors (default 0.05..1.00)")
    p.add_argument("--xi", type=float, default=0.0, help="Loss penalty coefficient (0.3 for the penalized tables)")
    p.set_defaults(func=cmd_sweep_load)

    p = sub.add_parser("tra", parents=[common], help="Heuristic penalty loop")
    p.add_argument("--case", required=True)
    p.add_argument("--load", type=float, default=1.0)
    p.add_argument("--xi0", type=float, default=Config.TRA_XI0)
    p.add_argument("--dxi", type=float, default=Config.TRA_DXI)
    p.add_argument("--kmax", type=int, default=Config.TRA_K_MAX)
    p.add_argument("--side", choices=("sending", "receiving"), default="sending")
    p.set_defaults(func=cmd_tra)

    p = sub.add_parser("sweep-penalty", parents=[common], help="Gaps over a grid of penalty coefficients")
    p.add_argument("--case", required=True)
    p.add_argument("--load", type=float, default=1.0)
    p.add_argument("--grid", default="", help="Comma separated xi values")
    p.set_defaults(func=cmd_sweep_penalty)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.verbose:
        set_level("DEBUG")

    print("\n--- SOC-ACOPF Tightness ---")
    print(f"Command: {args.command}")
    print("---------------------------")

    try:
        Config.validate()
        ensure_directory(args.out)
        code = args.func(args)
    except (UsageError, CaseDataError, ModelBuildError, ConfigurationError, FileNotFoundError, ValueError) as e:
        logger.error(f"{args.command} aborted: {e}")
        print(f"\n❌ {type(e).__name__}: {e}")
        return EXIT_USAGE
    except SolveFailedError as e:
        logger.error(f"{args.command} aborted: {e}", exc_info=args.verbose)
        print(f"\n❌ Solver failure: {e}")
        return EXIT_SOLVER
    except SocOpfError as e:
        logger.error(f"{args.command} aborted: {e}", exc_info=True)
        print(f"\n❌ {type(e).__name__}: {e}")
        return EXIT_SOLVER

    marker = "✅" if code == EXIT_OK else "⚠️"
    print(f"\n{marker} {args.command} finished with exit code {code}")
    print("---------------------------\n")
    return code


if __name__ == "__main__":
    sys.exit(main())
