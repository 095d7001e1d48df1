"""
Builder for the SOC-ACOPF conic program.

Rows (p.u., V = voltage magnitude squared, V_s' = V_s / tap^2 the sending voltage seen by
the series element):

    active balance    C_g p_g - A+ p_s + A- p_o - diag(G) V = p_d
    reactive balance  C_g q_g - A+ q_s + A- q_o + diag(B) V = q_d
    voltage drop      V_s' - V_r - 2 (R p_s + X q_s) + R p_o + X q_o = 0
    angle drop        theta_l - X p_s + R q_s = 0
    loss coupling     X p_o - R q_o = 0
    angle link        theta_l - theta_s + theta_r = -shift
    loss cone         2 (q_o / 2X) V_s' >= p_s^2 + q_s^2
    angle cone        2 (V_s' sin^2(theta_max) / 2) V_r >= theta_l^2
    loss bound        q_o <= (K - V_s' B_s^2 + 2 q_s B_s) X       (rated lines only)
"""

import math
from typing import List, Literal, Tuple

import numpy as np
import scipy.sparse as sp
from pydantic import BaseModel, ConfigDict, Field

from src.errors import InfeasibleBoxError
from src.model.program import AffineRows, ConicProgram, RotatedConeBlock
from src.model.variables import VariableMap
from src.network.network_model import Network
from src.utils.logger import setup_logger

logger = setup_logger(__name__)

PenaltyTarget = Literal["reactive", "active_plus_reactive"]
LossSide = Literal["sending", "receiving"]


class PenaltySpec(BaseModel):
    """
    Loss penalty added to the generation cost: xi * sum(q_o), optionally xi * sum(p_o + q_o).

    Each loss is signed by `Network.loss_orientation`, so on series capacitors (X < 0) the
    term is xi * |q_o|.
    """
    model_config = ConfigDict(frozen=True)

    xi: float = Field(default=0.0, ge=0.0, allow_inf_nan=False)
    target: PenaltyTarget = "reactive"


class _Rows:
    """Triplet accumulator for a block of linear rows."""

    def __init__(self, n_vars: int):
        self.n_vars = n_vars
        self._rows: List[int] = []
        self._cols: List[int] = []
        self._vals: List[float] = []
        self.rhs: List[float] = []
        self.labels: List[str] = []

    def add(self, terms: List[Tuple[int, float]], rhs: float, label: str) -> None:
        r = len(self.rhs)
        for col, val in terms:
            if val != 0.0:
                self._rows.append(r)
                self._cols.append(col)
                self._vals.append(float(val))
        self.rhs.append(float(rhs))
        self.labels.append(label)

    def matrix(self) -> sp.csr_matrix:
        return sp.csr_matrix(
            (np.array(self._vals, dtype=float), (np.array(self._rows, dtype=int), np.array(self._cols, dtype=int))),
            shape=(len(self.rhs), self.n_vars),
        )


def _affine(entries: List[List[Tuple[int, float]]], offsets: List[float], n_vars: int) -> AffineRows:
    rows = _Rows(n_vars)
    for k, terms in enumerate(entries):
        rows.add(terms, 0.0, str(k))
    return AffineRows(matrix=rows.matrix(), offset=np.asarray(offsets, dtype=float))


def _boxes(net: Network, vmap: VariableMap) -> Tuple[np.ndarray, np.ndarray]:
    lower = np.full(vmap.n_vars, -np.inf)
    upper = np.full(vmap.n_vars, np.inf)

    lower[vmap.slice("V")] = net.bus_array("v_min") ** 2
    upper[vmap.slice("V")] = net.bus_array("v_max") ** 2
    lower[vmap.slice("theta")] = net.bus_array("theta_min")
    upper[vmap.slice("theta")] = net.bus_array("theta_max")
    lower[vmap.slice("p_g")] = net.generator_array("p_min")
    upper[vmap.slice("p_g")] = net.generator_array("p_max")
    lower[vmap.slice("q_g")] = net.generator_array("q_min")
    upper[vmap.slice("q_g")] = net.generator_array("q_max")
    lower[vmap.slice("theta_l")] = net.branch_array("angle_min")
    upper[vmap.slice("theta_l")] = net.branch_array("angle_max")

    empty = np.flatnonzero(lower > upper)
    if empty.size:
        names = ", ".join(vmap.label(int(i)) for i in empty[:5])
        logger.error(f"{net.name}: empty variable box for {names}")
        raise InfeasibleBoxError(f"{net.name}: lower bound exceeds upper bound for {names}")
    return lower, upper


def build_socp(net: Network, penalty: PenaltySpec = PenaltySpec(),
               loss_side: LossSide = "sending") -> Tuple[ConicProgram, VariableMap]:
    """
    Build the SOC-ACOPF conic program of a network.

    Args:
        net (Network): Per-unit network.
        penalty (PenaltySpec): Loss penalty added to the objective (xi = 0 disables it).
        loss_side (str): Terminal used by the loss cone and the loss bound, "sending"
            (default) or "receiving".

    Returns:
        Tuple[ConicProgram, VariableMap]: The program and its variable layout.

    Raises:
        InfeasibleBoxError: A variable has lower bound > upper bound.
    """
    if loss_side not in ("sending", "receiving"):
        raise ValueError(f"loss_side must be 'sending' or 'receiving', got {loss_side!r}")

    vmap = VariableMap(net.n_buses, net.n_generators, net.n_branches)
    n = vmap.n_vars
    V = vmap.indices("V")
    th = vmap.indices("theta")
    pg, qg = vmap.indices("p_g"), vmap.indices("q_g")
    ps, qs = vmap.indices("p_s"), vmap.indices("q_s")
    po, qo = vmap.indices("p_o"), vmap.indices("q_o")
    thl = vmap.indices("theta_l")

    f_pos, t_pos = net.from_positions(), net.to_positions()
    g_pos = net.generator_positions()

    # Objective
    curvature = np.zeros(n)
    linear = np.zeros(n)
    curvature[pg] = net.generator_array("cost_a")
    linear[pg] = net.generator_array("cost_b")
    constant = float(net.generator_array("cost_c").sum())
    if penalty.xi > 0:
        # Oriented so series capacitors are penalized on |q_o| as well
        sign_po, sign_qo = net.loss_orientation()
        linear[qo] += penalty.xi * sign_qo
        if penalty.target == "active_plus_reactive":
            linear[po] += penalty.xi * sign_po

    # Nodal balances, terms collected per bus in a fixed order
    eq = _Rows(n)
    p_terms: List[List[Tuple[int, float]]] = [[] for _ in range(net.n_buses)]
    q_terms: List[List[Tuple[int, float]]] = [[] for _ in range(net.n_buses)]
    for g, k in enumerate(g_pos):
        p_terms[k].append((pg[g], 1.0))
        q_terms[k].append((qg[g], 1.0))
    for l in range(net.n_branches):
        s, r = f_pos[l], t_pos[l]
        p_terms[s].append((ps[l], -1.0))
        q_terms[s].append((qs[l], -1.0))
        p_terms[r].extend([(ps[l], 1.0), (po[l], -1.0)])
        q_terms[r].extend([(qs[l], 1.0), (qo[l], -1.0)])
    for k, bus in enumerate(net.buses):
        p_terms[k].append((V[k], -bus.g_shunt))
        q_terms[k].append((V[k], bus.b_shunt))
        eq.add(p_terms[k], bus.p_load, f"p_balance[bus {bus.id}]")
    for k, bus in enumerate(net.buses):
        eq.add(q_terms[k], bus.q_load, f"q_balance[bus {bus.id}]")

    # Per-line rows
    ineq = _Rows(n)
    loss_u, loss_v, loss_w1, loss_w2 = [], [], [], []
    ang_u, ang_v, ang_w = [], [], []
    for l, br in enumerate(net.branches):
        s, r = f_pos[l], t_pos[l]
        R, X, inv_tap2 = br.r, br.x, 1.0 / br.tap ** 2
        tag = f"line {br.id} ({br.from_bus}-{br.to_bus})"

        eq.add([(V[s], inv_tap2), (V[r], -1.0), (ps[l], -2.0 * R), (qs[l], -2.0 * X),
                (po[l], R), (qo[l], X)], 0.0, f"voltage_drop[{tag}]")
        eq.add([(thl[l], 1.0), (ps[l], -X), (qs[l], R)], 0.0, f"angle_drop[{tag}]")
        eq.add([(po[l], X), (qo[l], -R)], 0.0, f"loss_coupling[{tag}]")
        eq.add([(thl[l], 1.0), (th[s], -1.0), (th[r], 1.0)], -br.shift, f"angle_link[{tag}]")

        loss_u.append([(qo[l], 1.0 / (2.0 * X))])
        if loss_side == "sending":
            loss_v.append([(V[s], inv_tap2)])
            loss_w1.append([(ps[l], 1.0)])
            loss_w2.append([(qs[l], 1.0)])
        else:
            loss_v.append([(V[r], 1.0)])
            loss_w1.append([(ps[l], 1.0), (po[l], -1.0)])
            loss_w2.append([(qs[l], 1.0), (qo[l], -1.0)])

        window = max(abs(br.angle_min), abs(br.angle_max))
        ang_u.append([(V[s], inv_tap2 * math.sin(window) ** 2 / 2.0)])
        ang_v.append([(V[r], 1.0)])
        ang_w.append([(thl[l], 1.0)])

        if math.isfinite(br.rate):
            sign = 1.0 if X > 0 else -1.0
            if loss_side == "sending":
                B = br.b_charge_send
                terms = [(qo[l], 1.0), (V[s], X * B ** 2 * inv_tap2), (qs[l], -2.0 * X * B)]
            else:
                B = br.b_charge_recv
                terms = [(qo[l], 1.0 - 2.0 * X * B), (V[r], X * B ** 2), (qs[l], 2.0 * X * B)]
            ineq.add([(col, sign * val) for col, val in terms], abs(X) * br.ampacity_sq, f"loss_bound[{tag}]")

    zeros = [0.0] * net.n_branches
    cones = (
        RotatedConeBlock("loss", _affine(loss_u, zeros, n), _affine(loss_v, zeros, n),
                         (_affine(loss_w1, zeros, n), _affine(loss_w2, zeros, n))),
        RotatedConeBlock("angle", _affine(ang_u, zeros, n), _affine(ang_v, zeros, n),
                         (_affine(ang_w, zeros, n),)),
    )

    lower, upper = _boxes(net, vmap)

    prog = ConicProgram(
        n_vars=n,
        curvature=curvature,
        linear=linear,
        constant=constant,
        a_eq=eq.matrix(),
        b_eq=np.asarray(eq.rhs, dtype=float),
        a_ineq=ineq.matrix(),
        b_ineq=np.asarray(ineq.rhs, dtype=float),
        cones=cones,
        lower=lower,
        upper=upper,
        eq_labels=tuple(eq.labels),
        ineq_labels=tuple(ineq.labels),
        var_labels=tuple(vmap.label(i) for i in range(n)),
    )
    logger.info(f"Built SOC program for '{net.name}': {n} variables, {prog.n_eq} equalities, "
                f"{prog.n_ineq} loss bounds, {prog.n_cones} cones (xi={penalty.xi}, side={loss_side})")
    return prog, vmap
