"""
Decoding of solver vectors into physical quantities.
"""

from dataclasses import dataclass, replace
from typing import Any, Dict, Optional, Tuple

import numpy as np

from src.errors import DimensionMismatchError, NonPositiveVoltageSquareError
from src.model.builder import PenaltySpec, PenaltyTarget
from src.model.variables import VariableMap
from src.network.network_model import Network
from src.utils.logger import setup_logger

logger = setup_logger(__name__)


@dataclass(frozen=True)
class OpfSolution:
    """SOC-ACOPF operating point in p.u.; `objective` is always the unpenalized cost in $/h."""
    V: np.ndarray
    v: np.ndarray
    theta: np.ndarray
    p_g: np.ndarray
    q_g: np.ndarray
    p_s: np.ndarray
    q_s: np.ndarray
    p_o: np.ndarray
    q_o: np.ndarray
    theta_l: np.ndarray
    objective: float
    objective_penalized: float
    bus_ids: Tuple[int, ...] = ()
    line_ids: Tuple[int, ...] = ()
    xi: float = 0.0
    target: PenaltyTarget = "reactive"
    loss_sign: Optional[Tuple[np.ndarray, np.ndarray]] = None

    @property
    def p_r(self) -> np.ndarray:
        return self.p_s - self.p_o

    @property
    def q_r(self) -> np.ndarray:
        return self.q_s - self.q_o

    @property
    def total_generation(self) -> Tuple[float, float]:
        return float(self.p_g.sum()), float(self.q_g.sum())

    @property
    def total_losses(self) -> Tuple[float, float]:
        return float(self.p_o.sum()), float(self.q_o.sum())

    def penalized_objective(self, xi: float, target: PenaltyTarget = "reactive") -> float:
        """Cost plus xi * sum(q_o) (or xi * sum(p_o + q_o)), losses oriented by `loss_sign`."""
        sign_po, sign_qo = self.loss_sign or (1.0, 1.0)
        loss = float(np.sum(sign_qo * self.q_o))
        if target == "active_plus_reactive":
            loss += float(np.sum(sign_po * self.p_o))
        return float(self.objective + xi * loss)

    def to_dict(self, base_mva: float = 1.0, units: str = "pu") -> Dict[str, Any]:
        """
        JSON-ready listing. With units="mva" power quantities are multiplied by base_mva;
        voltages and angles stay in p.u. and radians.
        """
        scale = base_mva if units == "mva" else 1.0
        p_total, q_total = self.total_generation
        p_loss, q_loss = self.total_losses
        return {
            "units": units,
            "objective": self.objective,
            "objective_penalized": self.objective_penalized,
            "xi": self.xi,
            "penalty_target": self.target,
            "total_generation": {"p": p_total * scale, "q": q_total * scale},
            "total_losses": {"p": p_loss * scale, "q": q_loss * scale},
            "buses": [
                {"id": bus_id, "V": float(self.V[k]), "v": float(self.v[k]), "theta": float(self.theta[k])}
                for k, bus_id in enumerate(self.bus_ids)
            ],
            "generators": [
                {"index": g, "p": float(self.p_g[g] * scale), "q": float(self.q_g[g] * scale)}
                for g in range(len(self.p_g))
            ],
            "lines": [
                {
                    "id": line_id,
                    "p_s": float(self.p_s[l] * scale), "q_s": float(self.q_s[l] * scale),
                    "p_r": float(self.p_r[l] * scale), "q_r": float(self.q_r[l] * scale),
                    "p_o": float(self.p_o[l] * scale), "q_o": float(self.q_o[l] * scale),
                    "theta_l": float(self.theta_l[l]),
                }
                for l, line_id in enumerate(self.line_ids)
            ],
        }


def extract_solution(x: np.ndarray, vmap: VariableMap, net: Network,
                     penalty: Optional[PenaltySpec] = None) -> OpfSolution:
    """
    Decode a primal vector into an OpfSolution.

    Args:
        x (np.ndarray): Primal vector of length vmap.n_vars.
        vmap (VariableMap): Layout the vector was produced with.
        net (Network): Network the program was built from.
        penalty (Optional[PenaltySpec]): Penalty used in the solve, for the penalized objective.

    Returns:
        OpfSolution: Decoded operating point.

    Raises:
        DimensionMismatchError: x, vmap and net disagree on sizes.
        NonPositiveVoltageSquareError: Some V_n <= 0.
    """
    x = np.asarray(x, dtype=float)
    if x.shape != (vmap.n_vars,):
        raise DimensionMismatchError(f"Primal vector has shape {x.shape}, expected ({vmap.n_vars},)")
    if (vmap.n_buses, vmap.n_generators, vmap.n_lines) != (net.n_buses, net.n_generators, net.n_branches):
        raise DimensionMismatchError(f"Variable map does not match network '{net.name}'")

    blocks = vmap.split(x)
    V = blocks["V"]
    bad = np.flatnonzero(V <= 0)
    if bad.size:
        ids = [net.buses[k].id for k in bad[:5]]
        logger.error(f"{net.name}: non-positive voltage square at buses {ids}")
        raise NonPositiveVoltageSquareError(f"V <= 0 at buses {ids}")

    p_g = blocks["p_g"]
    objective = float(sum(gen.cost(p) for gen, p in zip(net.generators, p_g)))
    penalty = penalty or PenaltySpec()

    sol = OpfSolution(
        V=V,
        v=np.sqrt(V),
        theta=blocks["theta"],
        p_g=p_g,
        q_g=blocks["q_g"],
        p_s=blocks["p_s"],
        q_s=blocks["q_s"],
        p_o=blocks["p_o"],
        q_o=blocks["q_o"],
        theta_l=blocks["theta_l"],
        objective=objective,
        objective_penalized=objective,
        bus_ids=tuple(bus.id for bus in net.buses),
        line_ids=tuple(br.id for br in net.branches),
        xi=penalty.xi,
        target=penalty.target,
        loss_sign=net.loss_orientation(),
    )
    return replace(sol, objective_penalized=sol.penalized_objective(penalty.xi, penalty.target))
