"""Tests for the SOC-ACOPF program builder and the variable layout."""

import math
from dataclasses import replace

import numpy as np
import pytest
from pydantic import ValidationError

from src.errors import InfeasibleBoxError
from src.model.builder import PenaltySpec, build_socp
from src.model.program import dump_program
from src.model.variables import BLOCK_ORDER, VariableMap
from src.network.network_model import Generator
from src.utils.file_handling import read_json
from tests.networks import series_capacitor_network, two_bus_network


def random_point(n: int, seed: int = 7) -> np.ndarray:
    return np.random.default_rng(seed).uniform(0.5, 1.5, size=n)


def row_terms(prog, label):
    listing = prog.to_dict()
    rows = [row for row in listing["equalities"] + listing["inequalities"] if row["label"] == label]
    assert len(rows) == 1
    return rows[0]


class TestVariableMap:
    def test_case9_size(self, case9):
        _, vmap = build_socp(case9)
        assert vmap.n_vars == 2 * 9 + 2 * 3 + 5 * 9 == 69

    def test_bijection(self):
        vmap = VariableMap(4, 2, 5)
        seen = np.concatenate([vmap.indices(block) for block in BLOCK_ORDER])
        assert sorted(seen.tolist()) == list(range(vmap.n_vars))
        for i in range(vmap.n_vars):
            block, k = vmap.locate(i)
            assert vmap.index(block, k) == i

    def test_out_of_range(self):
        vmap = VariableMap(2, 1, 1)
        with pytest.raises(IndexError):
            vmap.index("p_g", 1)
        with pytest.raises(IndexError):
            vmap.locate(vmap.n_vars)


class TestBuildSocp:
    def test_loss_coupling_row(self, two_bus):
        prog, _ = build_socp(two_bus)
        row = row_terms(prog, "loss_coupling[line 1 (1-2)]")
        assert row["terms"] == {"p_o[0]": pytest.approx(0.1), "q_o[0]": pytest.approx(-0.01)}
        assert row["rhs"] == 0.0

    def test_voltage_drop_row(self, two_bus):
        prog, _ = build_socp(two_bus)
        row = row_terms(prog, "voltage_drop[line 1 (1-2)]")
        assert row["terms"] == pytest.approx({"V[0]": 1.0, "V[1]": -1.0, "p_s[0]": -0.02, "q_s[0]": -0.2,
                                              "p_o[0]": 0.01, "q_o[0]": 0.1})

    def test_balance_rhs_is_load(self, case9):
        prog, _ = build_socp(case9)
        assert np.allclose(prog.b_eq[:9], case9.bus_array("p_load"))
        assert np.allclose(prog.b_eq[9:18], case9.bus_array("q_load"))

    def test_convex_objective(self, case14):
        prog, _ = build_socp(case14)
        prog.check()
        assert np.all(prog.curvature >= 0)

    def test_boxes(self, case9):
        prog, vmap = build_socp(case9)
        assert np.allclose(prog.lower[vmap.slice("V")], 0.81)
        assert np.allclose(prog.upper[vmap.slice("V")], 1.21)
        slack = vmap.index("theta", case9.slack_position)
        assert prog.lower[slack] == prog.upper[slack] == 0.0
        assert np.all(np.isinf(prog.lower[vmap.slice("p_s")]))
        assert np.allclose(prog.upper[vmap.slice("theta_l")], math.pi / 3)

    def test_infeasible_box(self, two_bus):
        bad = replace(two_bus, generators=(Generator(1, 1.0, 0.5, -1.0, 1.0, 0.0, 1.0, 0.0),))
        with pytest.raises(InfeasibleBoxError):
            build_socp(bad)

    def test_loss_bound_only_for_rated_lines(self):
        unrated, _ = build_socp(two_bus_network())
        rated, _ = build_socp(two_bus_network(rate=1.0))
        assert unrated.n_ineq == 0
        assert rated.n_ineq == 1
        assert rated.b_ineq[0] == pytest.approx(0.1 * 1.0)

    def test_loss_bound_expansion(self):
        prog, _ = build_socp(two_bus_network(rate=1.5, b_charge=0.05))
        row = row_terms(prog, "loss_bound[line 1 (1-2)]")
        assert row["terms"] == pytest.approx({"q_o[0]": 1.0, "V[0]": 0.1 * 0.05 ** 2, "q_s[0]": -2 * 0.1 * 0.05})
        assert row["rhs"] == pytest.approx(0.1 * 1.5 ** 2)

    def test_deterministic(self, case14):
        first, _ = build_socp(case14, PenaltySpec(xi=0.3))
        second, _ = build_socp(case14, PenaltySpec(xi=0.3))
        assert (first.a_eq != second.a_eq).nnz == 0
        assert np.array_equal(first.a_eq.indices, second.a_eq.indices)
        assert np.array_equal(first.linear, second.linear)
        assert first.to_dict() == second.to_dict()


class TestPenalty:
    def test_constraints_identical(self, case9):
        plain, _ = build_socp(case9)
        penalized, _ = build_socp(case9, PenaltySpec(xi=0.3))
        assert (plain.a_eq != penalized.a_eq).nnz == 0
        assert np.array_equal(plain.b_eq, penalized.b_eq)
        assert (plain.a_ineq != penalized.a_ineq).nnz == 0
        assert np.array_equal(plain.lower, penalized.lower)
        assert np.array_equal(plain.curvature, penalized.curvature)

    def test_penalty_separation(self, case9):
        plain, vmap = build_socp(case9)
        penalized, _ = build_socp(case9, PenaltySpec(xi=0.3))
        for seed in range(5):
            x = random_point(vmap.n_vars, seed)
            expected = 0.3 * x[vmap.slice("q_o")].sum()
            assert penalized.objective(x) - plain.objective(x) == pytest.approx(expected, rel=1e-12, abs=1e-9)

    def test_active_plus_reactive_target(self, two_bus):
        prog, vmap = build_socp(two_bus, PenaltySpec(xi=0.5, target="active_plus_reactive"))
        assert prog.linear[vmap.index("p_o", 0)] == 0.5
        assert prog.linear[vmap.index("q_o", 0)] == 0.5

    def test_series_capacitor_penalized_on_magnitude(self):
        net = series_capacitor_network()
        prog, vmap = build_socp(net, PenaltySpec(xi=0.3, target="active_plus_reactive"))
        assert prog.linear[vmap.slice("q_o")].tolist() == [-0.3, 0.3]
        assert prog.linear[vmap.slice("p_o")].tolist() == [0.3, 0.3]

    def test_negative_xi_rejected(self):
        with pytest.raises(ValidationError):
            PenaltySpec(xi=-0.1)


class TestCones:
    def test_loss_cone_encoding(self, case9):
        prog, vmap = build_socp(case9)
        loss = next(block for block in prog.cones if block.name == "loss")
        x_tap = np.array([br.tap for br in case9.branches])
        X = case9.branch_array("x")
        for seed in range(10):
            x = random_point(vmap.n_vars, seed)
            blocks = vmap.split(x)
            V_s = blocks["V"][case9.from_positions()] / x_tap ** 2
            flow_sq = blocks["p_s"] ** 2 + blocks["q_s"] ** 2
            lhs = blocks["q_o"] * V_s - flow_sq * X
            assert np.allclose(loss.margin(x) * X, lhs)
            assert np.array_equal(loss.margin(x) >= 0, lhs >= 0)

    def test_angle_cone_coefficient(self, two_bus):
        prog, vmap = build_socp(two_bus)
        angle = next(block for block in prog.cones if block.name == "angle")
        assert angle.u.matrix[0, vmap.index("V", 0)] == pytest.approx(math.sin(math.pi / 3) ** 2 / 2)
        assert angle.v.matrix[0, vmap.index("V", 1)] == 1.0
        assert angle.w[0].matrix[0, vmap.index("theta_l", 0)] == 1.0

    def test_receiving_side(self, two_bus):
        prog, vmap = build_socp(two_bus, loss_side="receiving")
        loss = next(block for block in prog.cones if block.name == "loss")
        assert loss.v.matrix[0, vmap.index("V", 1)] == 1.0
        assert loss.w[0].matrix[0, vmap.index("p_o", 0)] == -1.0

    def test_unknown_side(self, two_bus):
        with pytest.raises(ValueError):
            build_socp(two_bus, loss_side="middle")


class TestDump:
    def test_dump_program(self, two_bus, tmp_path):
        prog, vmap = build_socp(two_bus, PenaltySpec(xi=0.3))
        path = dump_program(prog, tmp_path / "program.json")
        listing = read_json(path)
        assert listing["n_vars"] == vmap.n_vars
        assert len(listing["equalities"]) == prog.n_eq
        assert listing["objective"]["linear"]["q_o[0]"] == pytest.approx(0.3)
        assert {cone["block"] for cone in listing["cones"]} == {"loss", "angle"}
        assert listing["bounds"][vmap.index("p_s", 0)]["lower"] == "-inf"
