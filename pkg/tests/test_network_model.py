"""Tests for the per-unit network model, load scaling and incidence."""

import math
from collections import deque

import numpy as np
import pytest

from src.errors import (
    IslandedNetworkError, MultipleSlackError, NoSlackError, NonPositiveFactorError,
    NonPositiveReactanceError,
)
from src.network.bundled_cases import canonical_name, load_case, load_raw_case
from src.network.matpower_parser import parse_matpower
from src.network.network_model import (
    PD, QD, BusKind, check_connectivity, incidence, scale_loads, to_network,
)
from tests.test_matpower_parser import MINI_CASE

BRANCH_ROW = "1  2  0.01  0.1  0.02  100  100  100  0  0  1  -360  360;"


def mini_network(branch_row: str = BRANCH_ROW, **kwargs):
    return to_network(parse_matpower(MINI_CASE.replace(BRANCH_ROW, branch_row)), **kwargs)


def bfs_connected(n_buses, edges):
    neighbours = {k: set() for k in range(n_buses)}
    for a, b in edges:
        neighbours[a].add(b)
        neighbours[b].add(a)
    seen, queue = {0}, deque([0])
    while queue:
        for nxt in neighbours[queue.popleft()] - seen:
            seen.add(nxt)
            queue.append(nxt)
    return n_buses > 0 and len(seen) == n_buses


def bus_edges(net):
    return [(net.bus_index[br.from_bus], net.bus_index[br.to_bus]) for br in net.branches]


class TestToNetwork:
    def test_case9_dimensions(self, case9):
        assert (case9.n_buses, case9.n_branches, case9.n_generators) == (9, 9, 3)
        assert case9.buses[case9.slack_position].id == 1

    def test_case14_dimensions(self, case14):
        assert case14.n_buses == 14
        assert case14.n_branches == 20

    def test_per_unit_conversion(self, case9):
        bus5 = case9.buses[case9.bus_index[5]]
        assert bus5.p_load == pytest.approx(0.9)
        assert bus5.q_load == pytest.approx(0.3)
        assert case9.generators[0].p_max == pytest.approx(2.5)
        assert case9.branches[1].rate == pytest.approx(2.5)

    def test_cost_rebased_to_per_unit(self, case9):
        gen = case9.generators[0]
        assert (gen.cost_a, gen.cost_b, gen.cost_c) == pytest.approx((0.11 * 100 ** 2, 5 * 100, 150))
        assert gen.cost(0.723) == pytest.approx(0.11 * 72.3 ** 2 + 5 * 72.3 + 150)

    def test_charging_split_and_folded(self):
        net = mini_network()
        br = net.branches[0]
        assert br.b_charge_send == br.b_charge_recv == pytest.approx(0.01)
        assert net.buses[0].b_shunt == pytest.approx(0.01)
        assert net.buses[1].b_shunt == pytest.approx(0.01)

    def test_tap_scales_sending_charging(self):
        net = mini_network("1  2  0.01  0.1  0.02  100  100  100  1.1  0  1  -360  360;")
        assert net.branches[0].tap == 1.1
        assert net.buses[0].b_shunt == pytest.approx(0.01 / 1.21)
        assert net.buses[1].b_shunt == pytest.approx(0.01)

    def test_zero_tap_means_line(self):
        assert mini_network().branches[0].tap == 1.0

    def test_default_angle_limits(self):
        br = mini_network().branches[0]
        assert br.angle_min == pytest.approx(-math.pi / 3)
        assert br.angle_max == pytest.approx(math.pi / 3)

    def test_file_angle_limits_inside_window(self):
        br = mini_network("1  2  0.01  0.1  0.02  100  100  100  0  0  1  -30  45;").branches[0]
        assert br.angle_min == pytest.approx(math.radians(-30))
        assert br.angle_max == pytest.approx(math.radians(45))

    def test_zero_angle_limits_mean_unconstrained(self):
        br = mini_network("1  2  0.01  0.1  0.02  100  100  100  0  0  1  0  0;").branches[0]
        assert br.angle_max == pytest.approx(math.pi / 3)

    def test_unrated_branch(self):
        br = mini_network("1  2  0.01  0.1  0.02  0  0  0  0  0  1  -360  360;").branches[0]
        assert math.isinf(br.rate)

    def test_slack_angle_fixed(self, case9):
        slack = case9.buses[case9.slack_position]
        assert slack.kind == BusKind.SLACK
        assert slack.theta_min == slack.theta_max == 0.0

    def test_zero_reactance_rejected(self):
        with pytest.raises(NonPositiveReactanceError):
            mini_network("1  2  0.01  0  0.02  100  100  100  0  0  1  -360  360;")

    def test_negative_reactance_needs_flag(self):
        row = "1  2  0.01  -0.1  0.02  100  100  100  0  0  1  -360  360;"
        with pytest.raises(NonPositiveReactanceError):
            mini_network(row)
        assert mini_network(row, allow_series_compensation=True).branches[0].x == -0.1

    def test_no_slack(self):
        with pytest.raises(NoSlackError):
            to_network(parse_matpower(MINI_CASE.replace("1  3  0   0", "1  2  0   0")))

    def test_two_slacks(self):
        with pytest.raises(MultipleSlackError):
            to_network(parse_matpower(MINI_CASE.replace("2  1  50  20", "2  3  50  20")))

    def test_out_of_service_branch_islands(self):
        with pytest.raises(IslandedNetworkError):
            mini_network("1  2  0.01  0.1  0.02  100  100  100  0  0  0  -360  360;")


class TestScaleLoads:
    def test_factor_applied(self, case9):
        scaled = scale_loads(case9, 0.05)
        assert np.array_equal(scaled.bus_array("p_load"), case9.bus_array("p_load_nominal") * 0.05)
        assert scaled.load_factor == 0.05

    def test_input_untouched(self, case9):
        before = case9.bus_array("p_load").copy()
        scale_loads(case9, 0.5)
        assert np.array_equal(case9.bus_array("p_load"), before)

    def test_repeated_scaling_matches_product(self, case14):
        twice = scale_loads(scale_loads(case14, 0.5), 0.5)
        once = scale_loads(case14, 0.25)
        assert np.array_equal(twice.bus_array("p_load"), once.bus_array("p_load"))
        assert np.array_equal(twice.bus_array("q_load"), once.bus_array("q_load"))

    def test_shunts_unchanged(self, case14):
        assert np.array_equal(scale_loads(case14, 0.3).bus_array("b_shunt"), case14.bus_array("b_shunt"))

    @pytest.mark.parametrize("factor", [0.0, -1.0, float("nan"), float("inf")])
    def test_invalid_factor(self, case9, factor):
        with pytest.raises(NonPositiveFactorError):
            scale_loads(case9, factor)


class TestIncidence:
    def test_signs(self, case9):
        inc = incidence(case9)
        a_plus, a_minus = inc.a_plus.toarray(), inc.a_minus.toarray()
        for l, br in enumerate(case9.branches):
            s, r = case9.bus_index[br.from_bus], case9.bus_index[br.to_bus]
            assert a_plus[s, l] == 1 and a_plus[r, l] == -1
            assert a_minus[r, l] == -1 and a_minus[s, l] == 0
        assert np.all(a_plus.sum(axis=0) == 0)
        assert np.all(a_minus.sum(axis=0) == -1)


class TestBundledCases:
    def test_aliases(self):
        assert canonical_name("IEEE14") == "case14"
        assert canonical_name("case118") == "case118"
        assert canonical_name("case5") is None

    def test_bundled_fixture_by_name(self):
        net = load_case("IEEE14")
        assert net.name == "IEEE14"
        assert net.n_buses == 14

    def test_unknown_name(self):
        with pytest.raises(FileNotFoundError):
            load_case("no_such_case")


class TestConnectivity:
    @pytest.mark.parametrize("fixture", ["case9", "case14"])
    def test_matches_breadth_first_search(self, fixture, request):
        net = request.getfixturevalue(fixture)
        edges = bus_edges(net)
        assert check_connectivity(net.n_buses, edges) == bfs_connected(net.n_buses, edges) is True
        for k in range(len(edges)):
            reduced = edges[:k] + edges[k + 1:]
            assert check_connectivity(net.n_buses, reduced) == bfs_connected(net.n_buses, reduced)

    def test_islanded_variants(self, case14):
        edges = bus_edges(case14)
        touching_last = [e for e in edges if case14.n_buses - 1 not in e]
        assert not check_connectivity(case14.n_buses, touching_last)
        assert not bfs_connected(case14.n_buses, touching_last)
        assert check_connectivity(case14.n_buses + 1, edges) == bfs_connected(case14.n_buses + 1, edges) is False

    def test_empty_graph(self):
        assert not check_connectivity(0, [])
        assert check_connectivity(1, [])


class TestPerUnitData:
    @pytest.mark.parametrize("fixture", ["case9", "case14"])
    def test_loads_round_trip_to_mw(self, fixture, request):
        net = request.getfixturevalue(fixture)
        raw = load_raw_case(request.getfixturevalue(f"{fixture}_path"))
        raw_by_id = {int(row[0]): row for row in raw.bus_rows}
        for bus in net.buses:
            row = raw_by_id[bus.id]
            assert bus.p_load * net.base_mva == pytest.approx(row[PD], rel=1e-12, abs=1e-12)
            assert bus.q_load * net.base_mva == pytest.approx(row[QD], rel=1e-12, abs=1e-12)

    def test_fixed_shunt_before_charging_fold(self):
        text = MINI_CASE.replace("2  1  50  20  0  0  1", "2  1  50  20  5  -30  1")
        bus2 = to_network(parse_matpower(text)).buses[1]
        assert bus2.g_shunt == pytest.approx(0.05)
        assert bus2.b_shunt_fixed == pytest.approx(-0.30)
        assert bus2.b_shunt == pytest.approx(-0.30 + 0.01)


class TestBuildLogging:
    def test_dropped_branch_reported(self, package_caplog):
        spare = "1  2  0.01  0.1  0.02  100  100  100  0  0  0  -360  360;"
        net = mini_network(BRANCH_ROW + "\n    " + spare)
        assert net.dropped_branches == (2,)
        assert net.summary()["dropped_branches"] == 1
        assert "dropped 1 out-of-service branches [2]" in package_caplog.text

    def test_angle_fallback_warns(self, package_caplog):
        mini_network()
        warnings = [r for r in package_caplog.records if r.levelname == "WARNING"]
        assert any("no usable angle limits" in r.getMessage() and "60 deg" in r.getMessage() for r in warnings)

    def test_file_angle_limits_do_not_warn(self, package_caplog):
        mini_network("1  2  0.01  0.1  0.02  100  100  100  0  0  1  -30  45;")
        assert "no usable angle limits" not in package_caplog.text

    def test_unused_sections_logged(self, package_caplog):
        text = MINI_CASE.replace("mpc.gencost", "mpc.areas = [\n    1  1;\n];\nmpc.gencost")
        to_network(parse_matpower(text))
        assert "sections not used by the model: ['areas']" in package_caplog.text

    def test_summary(self):
        summary = mini_network().summary()
        assert summary["buses"] == 2 and summary["branches"] == 1
        assert summary["series_capacitors"] == 0
        assert summary["total_p_load"] == pytest.approx(0.5)
