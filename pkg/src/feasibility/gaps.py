"""
Relaxation gaps and nodal balance residuals of a SOC-ACOPF solution.

    gap_po = sign(R) (p_o - R (p^2 + q^2) / V)
    gap_qo = sign(X) (q_o - X (p^2 + q^2) / V)

with sending-end (p_s, q_s, V_s / tap^2) quantities by default. The signs make a relaxed
line show a positive gap on series capacitors (X < 0) too. A solution is AC-feasible
when both maxima over lines vanish (up to a tolerance).
"""

from dataclasses import dataclass, field
from functools import total_ordering
from typing import Any, Dict, Literal, Optional, Tuple

import numpy as np

from src.config import Config
from src.errors import DimensionMismatchError
from src.model.solution import OpfSolution
from src.network.network_model import Network, incidence


@total_ordering
@dataclass(frozen=True, eq=False)
class GapReport:
    """Per-line gaps with their maxima; reports sort by `worst_gap` (smaller is tighter)."""
    gap_po: np.ndarray
    gap_qo: np.ndarray
    gap_po_max: float
    gap_qo_max: float
    argmax_po: Optional[int]
    argmax_qo: Optional[int]
    balance_p_max: float
    balance_q_max: float
    tol: float
    feasible: bool
    line_ids: Tuple[int, ...] = field(default=(), repr=False)
    side: str = "sending"

    @property
    def worst_gap(self) -> float:
        return max(self.gap_po_max, self.gap_qo_max)

    def __lt__(self, other: "GapReport") -> bool:
        if not isinstance(other, GapReport):
            return NotImplemented
        return self.worst_gap < other.worst_gap

    def to_dict(self, base_mva: float = 1.0, units: str = "pu") -> Dict[str, Any]:
        scale = base_mva if units == "mva" else 1.0
        return {
            "units": units,
            "side": self.side,
            "tolerance": self.tol * scale,
            "feasible": self.feasible,
            "gap_po_max": self.gap_po_max * scale,
            "gap_qo_max": self.gap_qo_max * scale,
            "argmax_po": self.argmax_po,
            "argmax_qo": self.argmax_qo,
            "balance_p_max": self.balance_p_max * scale,
            "balance_q_max": self.balance_q_max * scale,
            "lines": [
                {"id": line_id, "gap_po": float(self.gap_po[l] * scale), "gap_qo": float(self.gap_qo[l] * scale)}
                for l, line_id in enumerate(self.line_ids)
            ],
        }

    def to_csv_row(self, case: str, load_level: float, base_mva: float = 1.0, units: str = "pu") -> Dict[str, Any]:
        scale = base_mva if units == "mva" else 1.0
        return {
            "case": case,
            "load_level": load_level,
            "gap_po_max": self.gap_po_max * scale,
            "gap_qo_max": self.gap_qo_max * scale,
            "feasible": self.feasible,
        }


def balance_residuals(sol: OpfSolution, net: Network) -> Tuple[np.ndarray, np.ndarray]:
    """
    Left-hand side minus right-hand side of the active and reactive nodal balances.

    Raises:
        DimensionMismatchError: the solution was not produced for this network.
    """
    if (len(sol.V), len(sol.p_g), len(sol.p_s)) != (net.n_buses, net.n_generators, net.n_branches):
        raise DimensionMismatchError(
            f"Solution sizes ({len(sol.V)}, {len(sol.p_g)}, {len(sol.p_s)}) do not match network "
            f"'{net.name}' ({net.n_buses}, {net.n_generators}, {net.n_branches})"
        )
    inc = incidence(net)
    gen_p = np.zeros(net.n_buses)
    gen_q = np.zeros(net.n_buses)
    np.add.at(gen_p, net.generator_positions(), sol.p_g)
    np.add.at(gen_q, net.generator_positions(), sol.q_g)

    active = gen_p - inc.a_plus @ sol.p_s + inc.a_minus @ sol.p_o \
        - net.bus_array("g_shunt") * sol.V - net.bus_array("p_load")
    reactive = gen_q - inc.a_plus @ sol.q_s + inc.a_minus @ sol.q_o \
        + net.bus_array("b_shunt") * sol.V - net.bus_array("q_load")
    return active, reactive


def line_gaps(sol: OpfSolution, net: Network, tol: float = Config.GAP_TOL_PU,
              side: Literal["sending", "receiving"] = "sending") -> GapReport:
    """
    Compute per-line relaxation gaps and their maxima.

    Args:
        sol (OpfSolution): Decoded solution.
        net (Network): Network the solution belongs to.
        tol (float): Feasibility tolerance in p.u.
        side (str): Terminal whose flow and voltage enter the exact loss expression.

    Returns:
        GapReport: Gaps in p.u.
    """
    p_bal, q_bal = balance_residuals(sol, net)

    if side == "sending":
        p, q = sol.p_s, sol.q_s
        V = sol.V[net.from_positions()] / net.branch_array("tap") ** 2
    else:
        p, q = sol.p_r, sol.q_r
        V = sol.V[net.to_positions()]
    flow_sq = (p * p + q * q) / V

    sign_po, sign_qo = net.loss_orientation()
    gap_po = sign_po * (sol.p_o - net.branch_array("r") * flow_sq)
    gap_qo = sign_qo * (sol.q_o - net.branch_array("x") * flow_sq)
    line_ids = tuple(br.id for br in net.branches)

    if line_ids:
        k_po, k_qo = int(np.argmax(gap_po)), int(np.argmax(gap_qo))
        po_max, qo_max = float(gap_po[k_po]), float(gap_qo[k_qo])
        argmax_po, argmax_qo = line_ids[k_po], line_ids[k_qo]
    else:
        po_max = qo_max = 0.0
        argmax_po = argmax_qo = None

    return GapReport(
        gap_po=gap_po,
        gap_qo=gap_qo,
        gap_po_max=po_max,
        gap_qo_max=qo_max,
        argmax_po=argmax_po,
        argmax_qo=argmax_qo,
        balance_p_max=float(np.max(np.abs(p_bal))) if p_bal.size else 0.0,
        balance_q_max=float(np.max(np.abs(q_bal))) if q_bal.size else 0.0,
        tol=tol,
        feasible=po_max <= tol and qo_max <= tol,
        line_ids=line_ids,
        side=side,
    )


def is_ac_feasible(report: GapReport, tol: float = Config.GAP_TOL_PU) -> bool:
    """True iff both gap maxima and both balance residual maxima are within tol."""
    if tol <= 0:
        raise ValueError(f"Tolerance must be positive, got {tol}")
    return (report.gap_po_max <= tol and report.gap_qo_max <= tol
            and report.balance_p_max <= tol and report.balance_q_max <= tol)
