"""Tests for penalty and load sweeps."""

import math
from types import SimpleNamespace

import pytest
from pydantic import ValidationError

import src.tra.sweeps as sweeps
from src.errors import SolveFailedError
from src.model.builder import PenaltySpec
from src.tra.penalty_loop import solve_case
from src.tra.sweeps import LoadCell, is_monotone, load_sweep, penalty_sweep, sweep_tables
from tests.test_gaps import report


def stub_solves(monkeypatch, failing_xi=None, failing_level=None):
    """
    Stub solve_case and fixed_penalty_run: gap_qo_max = 1 / (1 + 10 xi) and gap_po_max = load factor.

    Returns the list of (case, load factor, xi, target) passed to fixed_penalty_run.
    """
    fixed_runs = []

    def fake_solve_case(net, penalty, solver_opts, tol=1e-6, loss_side="sending"):
        if penalty.xi == failing_xi or net.load_factor == failing_level:
            raise SolveFailedError("stub failure", status="PrimalInfeasible")
        return SimpleNamespace(
            report=report(gap_po_max=net.load_factor, gap_qo_max=1.0 / (1.0 + 10.0 * penalty.xi)),
            solution=SimpleNamespace(objective=100.0 + penalty.xi, total_losses=(0.01, 0.02)),
        )

    def fake_fixed_penalty_run(net, xi=0.3, solver_opts=None, target="reactive", tol=1e-6):
        fixed_runs.append((net.name, net.load_factor, xi, target))
        return fake_solve_case(net, PenaltySpec(xi=xi, target=target), solver_opts, tol)

    monkeypatch.setattr(sweeps, "solve_case", fake_solve_case)
    monkeypatch.setattr(sweeps, "fixed_penalty_run", fake_fixed_penalty_run)
    return fixed_runs


class TestPenaltySweep:
    def test_input_order_with_pool(self, two_bus, monkeypatch):
        stub_solves(monkeypatch)
        xis = [0.5, 0.0, 0.3, 0.1, 0.2]
        points = penalty_sweep(two_bus, xis, max_workers=3)
        assert [p.xi for p in points] == xis
        assert [p.gap_qo_max for p in points] == pytest.approx([1 / (1 + 10 * xi) for xi in xis])

    def test_failed_entry_recorded(self, two_bus, monkeypatch):
        stub_solves(monkeypatch, failing_xi=0.2)
        points = penalty_sweep(two_bus, [0.1, 0.2, 0.3])
        assert [p.failed for p in points] == [False, True, False]
        assert points[1].status == "PrimalInfeasible"
        assert math.isnan(points[1].gap_qo_max)

    @pytest.mark.parametrize("xis", [[], [0.1, -0.2]])
    def test_invalid_grid(self, two_bus, xis):
        with pytest.raises(ValueError):
            penalty_sweep(two_bus, xis)

    def test_zero_penalty_matches_plain_solve(self, case9):
        point = penalty_sweep(case9, [0.0])[0]
        plain = solve_case(case9)
        assert point.objective == pytest.approx(plain.solution.objective, rel=1e-8)
        assert point.gap_qo_max == pytest.approx(plain.report.gap_qo_max, abs=1e-9)

    def test_reactive_loss_falls_with_xi(self, case9):
        points = penalty_sweep(case9, [0.0, 0.1, 0.3, 1.0])
        assert is_monotone([p.reactive_loss for p in points], increasing=False)
        assert is_monotone([p.objective for p in points], increasing=True)


class TestLoadSweep:
    def test_cells_sorted_by_case_then_level(self, two_bus, case9, monkeypatch):
        stub_solves(monkeypatch)
        cells = load_sweep([case9, two_bus], grid=[0.5, 0.25, 1.0], max_workers=4)
        assert [(c.case, c.load_level) for c in cells] == [
            ("case9", 0.25), ("case9", 0.5), ("case9", 1.0),
            ("two_bus", 0.25), ("two_bus", 0.5), ("two_bus", 1.0),
        ]
        assert cells[1].report.gap_po_max == 0.5

    def test_failed_cell(self, two_bus, monkeypatch):
        stub_solves(monkeypatch, failing_level=0.5)
        cells = load_sweep([two_bus], grid=[0.25, 0.5])
        assert [c.failed for c in cells] == [False, True]
        assert cells[1].status == "PrimalInfeasible"

    def test_fixed_penalty_preset(self, two_bus, monkeypatch):
        fixed_runs = stub_solves(monkeypatch)
        cells = load_sweep([two_bus], grid=[0.5, 1.0], xi=0.3, target="active_plus_reactive", max_workers=1)
        assert sorted(fixed_runs) == [("two_bus", 0.5, 0.3, "active_plus_reactive"),
                                      ("two_bus", 1.0, 0.3, "active_plus_reactive")]
        assert cells[0].report.gap_qo_max == pytest.approx(0.25)

    def test_invalid_penalty(self, two_bus):
        with pytest.raises(ValidationError):
            load_sweep([two_bus], grid=[0.5], xi=-0.3)

    @pytest.mark.parametrize("grid", [[], [0.0], [11.0]])
    def test_invalid_grid(self, two_bus, grid):
        with pytest.raises(ValueError):
            load_sweep([two_bus], grid=grid)

    def test_no_cases(self):
        with pytest.raises(ValueError):
            load_sweep([], grid=[0.5])


class TestSweepTables:
    def test_table_shape(self):
        cells = [
            LoadCell("case9", 0.5, report(gap_po_max=1e-3, gap_qo_max=2e-3)),
            LoadCell("case9", 1.0, None, status="NumericalError"),
            LoadCell("case14", 0.5, report(gap_qo_max=4e-3)),
            LoadCell("case14", 1.0, report()),
        ]
        active, reactive = sweep_tables(cells, xi=0.3, units="mva", base_mva={"case9": 100.0, "case14": 100.0})
        assert active.cases == ("case9", "case14")
        assert active.levels == (0.5, 1.0)
        assert active.value(0.5, "case9") == pytest.approx(0.1)
        assert reactive.value(0.5, "case14") == pytest.approx(0.4)
        assert active.value(1.0, "case9") is None
        assert reactive.n_failed == 1
        assert active.metadata["xi"] == 0.3


class TestIsMonotone:
    def test_within_slack(self):
        assert is_monotone([3.0, 2.0, 2.0 + 1e-9, 1.0], increasing=False)

    def test_violation(self):
        assert not is_monotone([1.0, 2.0, 1.5], increasing=True)
