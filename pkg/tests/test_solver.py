"""Tests for the cvxpy conic backend and its options."""

import math
import os

import numpy as np
import pytest
from pydantic import ValidationError

from src.model.builder import build_socp
from src.solver.cvxpy_backend import _captured_stdout, solve, solver_settings
from src.solver.options import SolveStatus, SolverOptions
from tests.programs import bounded_square, fixed_cone, split_sum


class TestSolverOptions:
    def test_backend_normalized(self):
        assert SolverOptions(backend="ecos").backend == "ECOS"

    def test_unknown_backend(self):
        with pytest.raises(ValidationError):
            SolverOptions(backend="MOSEKISH")

    @pytest.mark.parametrize("field", ["feas_tol", "gap_tol"])
    def test_non_positive_tolerance(self, field):
        with pytest.raises(ValidationError):
            SolverOptions(**{field: 0.0})

    def test_settings_per_backend(self):
        assert solver_settings(SolverOptions(max_iters=50))["max_iter"] == 50
        assert solver_settings(SolverOptions(backend="ECOS", feas_tol=1e-7))["feastol"] == 1e-7
        assert "eps_abs" in solver_settings(SolverOptions(backend="SCS"))


class TestToyPrograms:
    def test_bounded_square(self):
        res = solve(bounded_square())
        assert res.status == SolveStatus.OPTIMAL
        assert res.x[0] == pytest.approx(3.0, abs=1e-6)
        assert res.objective == pytest.approx(9.0, abs=1e-5)
        assert res.duals.lower[0] == pytest.approx(6.0, abs=1e-5)

    def test_fixed_cone(self):
        res = solve(fixed_cone())
        assert res.optimal
        assert res.x[0] == pytest.approx(-math.sqrt(2), abs=1e-6)
        dual = res.duals.cones[0]
        assert dual.s_w[0, 0] == pytest.approx(1.0, abs=1e-5)
        assert dual.s_u[0] == pytest.approx(1 / math.sqrt(2), abs=1e-5)

    def test_equality_multiplier_sign(self):
        res = solve(split_sum())
        assert res.x == pytest.approx([0.5, 0.5], abs=1e-6)
        assert res.duals.eq[0] == pytest.approx(-1.0, abs=1e-5)

    def test_ecos_backend(self):
        pytest.importorskip("ecos")
        res = solve(bounded_square(), SolverOptions(backend="ECOS"))
        assert res.optimal
        assert res.backend == "ECOS"
        assert res.x[0] == pytest.approx(3.0, abs=1e-6)


class TestCaseSolves:
    def test_case9_optimal(self, case9):
        prog, _ = build_socp(case9)
        res = solve(prog)
        assert res.status == SolveStatus.OPTIMAL
        assert 0 < res.iterations <= 200
        assert np.all(np.isfinite(res.x))

    def test_objective_scaling(self, case9):
        prog, _ = build_socp(case9)
        base = solve(prog)
        scaled = solve(prog.scaled(1e-3))
        assert scaled.optimal
        assert scaled.objective * 1e3 == pytest.approx(base.objective, rel=1e-6)

    def test_verbose_captures_log(self, two_bus):
        prog, _ = build_socp(two_bus)
        res = solve(prog, SolverOptions(verbose=True))
        assert res.optimal
        assert res.log
        assert "Clarabel" in res.log or "iter" in res.log.lower()

    def test_capture_merges_python_and_native_output(self):
        with _captured_stdout(True) as captured:
            print("from python")
            os.write(1, b"from fd\n")
        assert captured == ["from python\nfrom fd\n"]

    def test_capture_disabled(self, capsys):
        with _captured_stdout(False) as captured:
            print("visible")
        assert captured == []
        assert capsys.readouterr().out == "visible\n"

    def test_iteration_limit(self, case9):
        prog, _ = build_socp(case9)
        res = solve(prog, SolverOptions(max_iters=1))
        assert res.status in (SolveStatus.ITERATION_LIMIT, SolveStatus.NUMERICAL_ERROR)
        assert not res.optimal
