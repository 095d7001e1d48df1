"""
Independent KKT verification of a SolverResult against its ConicProgram.

Everything is recomputed from the program data and the returned primal/dual vectors;
nothing is read from the backend.
"""

from dataclasses import asdict, dataclass
from typing import Dict

import numpy as np

from src.errors import DimensionMismatchError
from src.model.program import ConicProgram
from src.solver.options import Duals, SolverResult


@dataclass(frozen=True)
class Residuals:
    equality: float
    inequality: float
    box: float
    cone: float
    stationarity: float
    stationarity_rel: float
    complementarity: float
    dual_infeasibility: float
    primal_objective: float
    dual_objective: float

    @property
    def primal(self) -> float:
        """Worst primal violation over equalities, inequalities, boxes and cones."""
        return max(self.equality, self.inequality, self.box, self.cone)

    @property
    def duality_gap(self) -> float:
        return self.primal_objective - self.dual_objective

    def to_dict(self) -> Dict[str, float]:
        out = asdict(self)
        out["duality_gap"] = self.duality_gap
        return out


def _check_dimensions(prog: ConicProgram, x: np.ndarray, duals: Duals) -> None:
    expected = {
        "x": (x.shape, (prog.n_vars,)),
        "eq": (duals.eq.shape, (prog.n_eq,)),
        "ineq": (duals.ineq.shape, (prog.n_ineq,)),
        "lower": (duals.lower.shape, (prog.n_vars,)),
        "upper": (duals.upper.shape, (prog.n_vars,)),
    }
    for name, (got, want) in expected.items():
        if got != want:
            raise DimensionMismatchError(f"{name} has shape {got}, expected {want}")
    if len(duals.cones) != len(prog.cones):
        raise DimensionMismatchError(f"{len(duals.cones)} cone duals for {len(prog.cones)} cone blocks")
    for block, dual in zip(prog.cones, duals.cones):
        if dual.s_u.shape != (block.n_cones,) or dual.s_w.shape != (block.n_cones, block.w_dim):
            raise DimensionMismatchError(f"Cone dual of block '{block.name}' has the wrong shape")


def _neg(values: np.ndarray) -> float:
    """Largest violation of values >= 0."""
    return float(max(0.0, -np.min(values))) if values.size else 0.0


def _abs_max(values: np.ndarray) -> float:
    return float(np.max(np.abs(values))) if values.size else 0.0


def kkt_residuals(prog: ConicProgram, res: SolverResult) -> Residuals:
    """
    Recompute primal feasibility, stationarity, complementarity and the dual objective.

    The Lagrangian is

        L = f(x) + y.(A x - b) + z.(G x - h) + l.(lb - x) + m.(x - ub) - sum_k s_k.(u, v, w)_k(x)

    and the dual objective is min_x L, evaluated exactly in the curved coordinates and at x
    in the flat ones (where stationarity makes the coefficient vanish).

    Raises:
        DimensionMismatchError: primal or dual vectors do not fit the program.
    """
    x = np.asarray(res.x, dtype=float)
    duals = res.duals
    _check_dimensions(prog, x, duals)

    lower_finite = np.isfinite(prog.lower)
    upper_finite = np.isfinite(prog.upper)
    lo_gap = np.where(lower_finite, prog.lower - x, 0.0)
    up_gap = np.where(upper_finite, x - prog.upper, 0.0)

    eq_res = prog.a_eq @ x - prog.b_eq
    ineq_res = prog.a_ineq @ x - prog.b_ineq

    grad = prog.gradient(x) + prog.a_eq.T @ duals.eq + prog.a_ineq.T @ duals.ineq - duals.lower + duals.upper
    lagrangian = prog.objective(x) + duals.eq @ eq_res + duals.ineq @ ineq_res \
        + duals.lower @ lo_gap + duals.upper @ up_gap

    cone_violation = 0.0
    cone_comp = 0.0
    dual_cone_violation = 0.0
    for block, dual in zip(prog.cones, duals.cones):
        if not block.n_cones:
            continue
        u, v, w = block.evaluate(x)
        cone_violation = max(cone_violation, _neg(2.0 * u * v - np.sum(w * w, axis=1)), _neg(u), _neg(v))
        dual_cone_violation = max(
            dual_cone_violation,
            _neg(2.0 * dual.s_u * dual.s_v - np.sum(dual.s_w * dual.s_w, axis=1)),
            _neg(dual.s_u), _neg(dual.s_v),
        )
        pairing = dual.s_u * u + dual.s_v * v + np.sum(dual.s_w * w, axis=1)
        cone_comp = max(cone_comp, _abs_max(pairing))
        lagrangian -= float(pairing.sum())
        grad = grad - block.u.matrix.T @ dual.s_u - block.v.matrix.T @ dual.s_v
        for j, wk in enumerate(block.w):
            grad = grad - wk.matrix.T @ dual.s_w[:, j]

    curved = prog.curvature > 0
    dual_objective = lagrangian - float(np.sum(grad[curved] ** 2 / (4.0 * prog.curvature[curved])))

    complementarity = max(
        _abs_max(duals.ineq * ineq_res),
        _abs_max(duals.lower[lower_finite] * lo_gap[lower_finite]),
        _abs_max(duals.upper[upper_finite] * up_gap[upper_finite]),
        cone_comp,
    )
    stationarity = _abs_max(grad)
    scale = 1.0 + max(_abs_max(prog.linear), _abs_max(prog.curvature))

    return Residuals(
        equality=_abs_max(eq_res),
        inequality=float(max(0.0, ineq_res.max())) if ineq_res.size else 0.0,
        box=float(max(0.0, lo_gap.max(initial=0.0), up_gap.max(initial=0.0))),
        cone=cone_violation,
        stationarity=stationarity,
        stationarity_rel=stationarity / scale,
        complementarity=complementarity,
        dual_infeasibility=max(_neg(duals.ineq), _neg(duals.lower), _neg(duals.upper), dual_cone_violation),
        primal_objective=prog.objective(x),
        dual_objective=dual_objective,
    )
