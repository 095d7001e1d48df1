"""
Per-unit bus/branch/generator network model built from a RawCase.

Conventions:
    - loads, shunts, ratings and generator limits are divided by base_mva;
    - line charging b is split b/2 per end and folded into the terminal bus shunt
      (b/(2*tap^2) at the sending end, where the series element sees V_s/tap^2), while
      the Branch keeps b_charge_send / b_charge_recv for the ampacity surrogate;
    - polynomial costs are rebased so that f(p) is in $/h with p in p.u.;
    - out-of-service branches and generators and isolated (type 4) buses are dropped.
"""

import math
from dataclasses import dataclass, field, replace
from enum import Enum
from functools import cached_property
from typing import Any, Dict, List, Tuple

import networkx as nx
import numpy as np
import scipy.sparse as sp

from src.config import Config
from src.errors import (
    IslandedNetworkError, MalformedFileError, MultipleSlackError, NoSlackError,
    NonPositiveFactorError, NonPositiveReactanceError,
)
from src.network.matpower_parser import RawCase, validate_raw_case
from src.utils.logger import setup_logger

logger = setup_logger(__name__)

# MATPOWER column indices (0-based)
BUS_I, BUS_TYPE, PD, QD, GS, BS = 0, 1, 2, 3, 4, 5
VMAX, VMIN = 11, 12
GEN_BUS, QMAX, QMIN, GEN_STATUS, PMAX, PMIN = 0, 3, 4, 7, 8, 9
F_BUS, T_BUS, BR_R, BR_X, BR_B, RATE_A, TAP, SHIFT, BR_STATUS, ANGMIN, ANGMAX = 0, 1, 2, 3, 4, 5, 8, 9, 10, 11, 12
COST_NCOST = 3

ISOLATED_BUS = 4


class BusKind(str, Enum):
    SLACK = "slack"
    GENERATOR = "generator"
    LOAD = "load"


_KIND_BY_TYPE = {1: BusKind.LOAD, 2: BusKind.GENERATOR, 3: BusKind.SLACK}


@dataclass(frozen=True)
class Bus:
    id: int
    kind: BusKind
    p_load_nominal: float
    q_load_nominal: float
    g_shunt: float
    b_shunt: float
    b_shunt_fixed: float
    v_min: float
    v_max: float
    theta_min: float = -math.pi
    theta_max: float = math.pi
    load_factor: float = 1.0

    @property
    def p_load(self) -> float:
        return self.p_load_nominal * self.load_factor

    @property
    def q_load(self) -> float:
        return self.q_load_nominal * self.load_factor


@dataclass(frozen=True)
class Branch:
    id: int
    from_bus: int
    to_bus: int
    r: float
    x: float
    b_charge_send: float
    b_charge_recv: float
    tap: float = 1.0
    shift: float = 0.0
    rate: float = math.inf
    angle_min: float = -math.pi / 3
    angle_max: float = math.pi / 3

    @property
    def ampacity_sq(self) -> float:
        """Squared per-unit rating standing in for the squared ampacity; inf when unrated."""
        return self.rate ** 2


@dataclass(frozen=True)
class Generator:
    bus: int
    p_min: float
    p_max: float
    q_min: float
    q_max: float
    cost_a: float
    cost_b: float
    cost_c: float

    def cost(self, p: float) -> float:
        return self.cost_a * p * p + self.cost_b * p + self.cost_c


@dataclass(frozen=True)
class Incidence:
    """Node-to-line incidence pair: a_plus (+1 sending, -1 receiving), a_minus (-1 receiving)."""
    a_plus: sp.csc_matrix
    a_minus: sp.csc_matrix


@dataclass(frozen=True)
class Network:
    buses: Tuple[Bus, ...]
    branches: Tuple[Branch, ...]
    generators: Tuple[Generator, ...]
    base_mva: float
    name: str = "network"
    dropped_branches: Tuple[int, ...] = field(default=(), compare=False)

    @property
    def n_buses(self) -> int:
        return len(self.buses)

    @property
    def n_branches(self) -> int:
        return len(self.branches)

    @property
    def n_generators(self) -> int:
        return len(self.generators)

    @cached_property
    def bus_index(self) -> Dict[int, int]:
        """Map from bus id to its position in `buses`."""
        return {bus.id: k for k, bus in enumerate(self.buses)}

    @property
    def slack_position(self) -> int:
        return next(k for k, bus in enumerate(self.buses) if bus.kind == BusKind.SLACK)

    @property
    def load_factor(self) -> float:
        return self.buses[0].load_factor if self.buses else 1.0

    def bus_array(self, attr: str) -> np.ndarray:
        return np.array([getattr(bus, attr) for bus in self.buses], dtype=float)

    def branch_array(self, attr: str) -> np.ndarray:
        return np.array([getattr(branch, attr) for branch in self.branches], dtype=float)

    def generator_array(self, attr: str) -> np.ndarray:
        return np.array([getattr(gen, attr) for gen in self.generators], dtype=float)

    def from_positions(self) -> np.ndarray:
        return np.array([self.bus_index[br.from_bus] for br in self.branches], dtype=int)

    def to_positions(self) -> np.ndarray:
        return np.array([self.bus_index[br.to_bus] for br in self.branches], dtype=int)

    def generator_positions(self) -> np.ndarray:
        return np.array([self.bus_index[gen.bus] for gen in self.generators], dtype=int)

    def loss_orientation(self) -> Tuple[np.ndarray, np.ndarray]:
        """
        Signs (of R, of X) per line, +1 where the value is zero.

        The loss cone bounds q_o from below on X > 0 lines and from above on series
        capacitors (X < 0); multiplying by these signs makes relaxed losses nonnegative.
        """
        r, x = self.branch_array("r"), self.branch_array("x")
        return np.where(r < 0, -1.0, 1.0), np.where(x < 0, -1.0, 1.0)

    def summary(self) -> Dict[str, Any]:
        return {
            "name": self.name,
            "buses": self.n_buses,
            "branches": self.n_branches,
            "dropped_branches": len(self.dropped_branches),
            "series_capacitors": int(sum(br.x < 0 for br in self.branches)),
            "generators": self.n_generators,
            "base_mva": self.base_mva,
            "load_factor": self.load_factor,
            "total_p_load": float(self.bus_array("p_load").sum()),
            "total_q_load": float(self.bus_array("q_load").sum()),
        }


def _angle_limit(value_deg: float, default_rad: float) -> float:
    """Use the file's branch angle limit only when it lies strictly inside (-90, 90) degrees."""
    if np.isfinite(value_deg) and -90.0 < value_deg < 90.0:
        return math.radians(value_deg)
    return default_rad


def _rebased_cost(row: np.ndarray, base_mva: float) -> Tuple[float, float, float]:
    n_coeffs = int(row[COST_NCOST])
    coeffs = [float(c) for c in row[4:4 + n_coeffs]]
    # Highest order first; pad to (c2, c1, c0)
    c2, c1, c0 = [0.0] * (3 - n_coeffs) + coeffs
    return c2 * base_mva ** 2, c1 * base_mva, c0


def check_connectivity(n_buses: int, edges: List[Tuple[int, int]]) -> bool:
    """True when the undirected graph on positions 0..n_buses-1 is connected."""
    graph = nx.Graph()
    graph.add_nodes_from(range(n_buses))
    graph.add_edges_from(edges)
    return n_buses > 0 and nx.is_connected(graph)


def to_network(raw: RawCase, allow_series_compensation: bool = False) -> Network:
    """
    Convert a RawCase into a validated per-unit Network.

    Args:
        raw (RawCase): Parsed MATPOWER matrices.
        allow_series_compensation (bool): Accept branches with x < 0 or r < 0 (series
            capacitors). x = 0 is always rejected.

    Returns:
        Network: Per-unit network with charging folded into bus shunts.

    Raises:
        NonPositiveReactanceError, NoSlackError, MultipleSlackError, IslandedNetworkError,
        MalformedFileError
    """
    validate_raw_case(raw)
    base = raw.base_mva
    default_angle = math.radians(Config.DEFAULT_ANGLE_LIMIT_DEG)

    bus_rows = raw.bus_rows
    kept_bus_rows = [row for row in bus_rows if int(row[BUS_TYPE]) != ISOLATED_BUS]
    kept_ids = {int(row[BUS_I]) for row in kept_bus_rows}
    if len(kept_bus_rows) < len(bus_rows):
        logger.warning(f"{raw.name}: dropping {len(bus_rows) - len(kept_bus_rows)} isolated buses")

    slack_ids = [int(row[BUS_I]) for row in kept_bus_rows if int(row[BUS_TYPE]) == 3]
    if not slack_ids:
        raise NoSlackError(f"{raw.name}: no slack (type 3) bus")
    if len(slack_ids) > 1:
        raise MultipleSlackError(f"{raw.name}: {len(slack_ids)} slack buses ({slack_ids})")

    # Branches first: their charging is folded into the bus shunts
    branches: List[Branch] = []
    dropped: List[int] = []
    defaulted_angles: List[int] = []
    b_fold: Dict[int, float] = {bus_id: 0.0 for bus_id in kept_ids}
    for k, row in enumerate(raw.branch_rows):
        f_bus, t_bus = int(row[F_BUS]), int(row[T_BUS])
        if row[BR_STATUS] <= 0 or f_bus not in kept_ids or t_bus not in kept_ids:
            dropped.append(k + 1)
            continue

        r, x = float(row[BR_R]), float(row[BR_X])
        if x == 0 or (x < 0 and not allow_series_compensation):
            raise NonPositiveReactanceError(f"{raw.name}: branch {k + 1} ({f_bus}-{t_bus}) has x = {x}")
        if r < 0 and not allow_series_compensation:
            raise MalformedFileError(f"{raw.name}: branch {k + 1} ({f_bus}-{t_bus}) has r = {r}")

        tap = float(row[TAP]) if row[TAP] != 0 else 1.0
        if tap <= 0:
            raise MalformedFileError(f"{raw.name}: branch {k + 1} has tap ratio {tap}")

        angmin_deg, angmax_deg = float(row[ANGMIN]), float(row[ANGMAX])
        if angmin_deg == 0 and angmax_deg == 0:
            angmin_deg, angmax_deg = -360.0, 360.0
        angle_min = _angle_limit(angmin_deg, -default_angle)
        angle_max = _angle_limit(angmax_deg, default_angle)
        if not (-90.0 < angmin_deg < 90.0 and -90.0 < angmax_deg < 90.0):
            defaulted_angles.append(k + 1)
        if angle_min > angle_max:
            raise MalformedFileError(f"{raw.name}: branch {k + 1} has angmin > angmax")

        rate = float(row[RATE_A]) / base if row[RATE_A] > 0 else math.inf
        half_b = float(row[BR_B]) / 2.0
        b_fold[f_bus] += half_b / tap ** 2
        b_fold[t_bus] += half_b

        branches.append(Branch(
            id=k + 1,
            from_bus=f_bus,
            to_bus=t_bus,
            r=r,
            x=x,
            b_charge_send=half_b,
            b_charge_recv=half_b,
            tap=tap,
            shift=math.radians(float(row[SHIFT])),
            rate=rate,
            angle_min=angle_min,
            angle_max=angle_max,
        ))
    if dropped:
        logger.warning(f"{raw.name}: dropped {len(dropped)} out-of-service branches {dropped[:10]}")
    if defaulted_angles:
        logger.warning(f"{raw.name}: {len(defaulted_angles)} branches have no usable angle limits, using "
                       f"+/-{math.degrees(default_angle):g} deg (branches {defaulted_angles[:10]})")

    buses: List[Bus] = []
    for row in kept_bus_rows:
        bus_id = int(row[BUS_I])
        kind = _KIND_BY_TYPE.get(int(row[BUS_TYPE]))
        if kind is None:
            raise MalformedFileError(f"{raw.name}: bus {bus_id} has unknown type {int(row[BUS_TYPE])}")
        v_min, v_max = float(row[VMIN]), float(row[VMAX])
        if not 0 < v_min <= v_max:
            raise MalformedFileError(f"{raw.name}: bus {bus_id} has voltage limits [{v_min}, {v_max}]")
        is_slack = kind == BusKind.SLACK
        b_fixed = float(row[BS]) / base
        buses.append(Bus(
            id=bus_id,
            kind=kind,
            p_load_nominal=float(row[PD]) / base,
            q_load_nominal=float(row[QD]) / base,
            g_shunt=float(row[GS]) / base,
            b_shunt=b_fixed + b_fold[bus_id],
            b_shunt_fixed=b_fixed,
            v_min=v_min,
            v_max=v_max,
            theta_min=0.0 if is_slack else -math.pi,
            theta_max=0.0 if is_slack else math.pi,
        ))

    generators: List[Generator] = []
    for k, row in enumerate(raw.gen_rows):
        if row[GEN_STATUS] <= 0 or int(row[GEN_BUS]) not in kept_ids:
            continue
        cost_a, cost_b, cost_c = _rebased_cost(raw.gencost_rows[k], base)
        if cost_a < 0:
            raise MalformedFileError(f"{raw.name}: generator {k + 1} has a concave cost (c2 < 0)")
        p_min, p_max = float(row[PMIN]) / base, float(row[PMAX]) / base
        q_min, q_max = float(row[QMIN]) / base, float(row[QMAX]) / base
        if p_min > p_max or q_min > q_max:
            raise MalformedFileError(f"{raw.name}: generator {k + 1} has inverted limits")
        generators.append(Generator(
            bus=int(row[GEN_BUS]),
            p_min=p_min,
            p_max=p_max,
            q_min=q_min,
            q_max=q_max,
            cost_a=cost_a,
            cost_b=cost_b,
            cost_c=cost_c,
        ))

    position = {bus.id: k for k, bus in enumerate(buses)}
    edges = [(position[br.from_bus], position[br.to_bus]) for br in branches]
    if not check_connectivity(len(buses), edges):
        raise IslandedNetworkError(f"{raw.name}: in-service branches do not connect all buses")

    net = Network(
        buses=tuple(buses),
        branches=tuple(branches),
        generators=tuple(generators),
        base_mva=base,
        name=raw.name,
        dropped_branches=tuple(dropped),
    )
    if raw.extra_sections:
        logger.debug(f"{raw.name}: sections not used by the model: {sorted(raw.extra_sections)}")
    logger.info(f"Built network {net.summary()}")
    return net


def scale_loads(net: Network, factor: float) -> Network:
    """
    Multiply every nodal load by `factor`, leaving the input network untouched.

    The factor is accumulated on each bus and applied to the nominal loads, so repeated
    scaling equals a single scaling by the product of the factors.

    Args:
        net (Network): Network to scale.
        factor (float): Positive load multiplier (1.0 is the file's load level).

    Returns:
        Network: New network with scaled loads.

    Raises:
        NonPositiveFactorError: factor <= 0 or not finite.
    """
    if not np.isfinite(factor) or factor <= 0:
        raise NonPositiveFactorError(f"Load factor must be positive, got {factor}")
    if factor == 1.0:
        return net
    buses = tuple(replace(bus, load_factor=bus.load_factor * factor) for bus in net.buses)
    return replace(net, buses=buses)


def incidence(net: Network) -> Incidence:
    """
    Build the node-to-line incidence pair (A+, A-) with shape |N| x |L|.

    A+ is +1 at the sending end and -1 at the receiving end; A- is -1 at the receiving
    end and 0 elsewhere.
    """
    n_lines = net.n_branches
    cols = np.arange(n_lines)
    from_pos = net.from_positions()
    to_pos = net.to_positions()

    a_plus = sp.csc_matrix(
        (np.concatenate([np.ones(n_lines), -np.ones(n_lines)]),
         (np.concatenate([from_pos, to_pos]), np.concatenate([cols, cols]))),
        shape=(net.n_buses, n_lines),
    )
    a_minus = sp.csc_matrix(
        (-np.ones(n_lines), (to_pos, cols)),
        shape=(net.n_buses, n_lines),
    )
    return Incidence(a_plus=a_plus, a_minus=a_minus)
