"""Tests for the independent KKT check."""

import math
from dataclasses import replace

import numpy as np
import pytest

from src.errors import DimensionMismatchError
from src.model.builder import build_socp
from src.solver.cvxpy_backend import solve
from src.solver.kkt import kkt_residuals
from src.solver.options import ConeDual, Duals, SolverResult, SolveStatus
from tests.programs import bounded_square, fixed_cone, split_sum


def result(x, duals) -> SolverResult:
    return SolverResult(status=SolveStatus.OPTIMAL, x=np.asarray(x, dtype=float), objective=float("nan"), duals=duals)


class TestHandBuiltPoints:
    def test_bounded_square(self):
        duals = Duals(eq=np.zeros(0), ineq=np.zeros(0), lower=np.array([6.0]), upper=np.zeros(1))
        res = kkt_residuals(bounded_square(), result([3.0], duals))
        assert res.primal <= 1e-12
        assert res.stationarity <= 1e-12
        assert res.complementarity <= 1e-12
        assert res.dual_objective == pytest.approx(9.0)
        assert res.duality_gap == pytest.approx(0.0, abs=1e-12)

    def test_fixed_cone(self):
        s = 1 / math.sqrt(2)
        cone = ConeDual(s_u=np.array([s]), s_v=np.array([s]), s_w=np.array([[1.0]]))
        duals = Duals(eq=np.zeros(0), ineq=np.zeros(0), lower=np.zeros(3), upper=np.array([0.0, s, s]),
                      cones=(cone,))
        res = kkt_residuals(fixed_cone(), result([-math.sqrt(2), 1.0, 1.0], duals))
        assert res.cone <= 1e-12
        assert res.stationarity <= 1e-12
        assert res.complementarity <= 1e-12
        assert res.dual_infeasibility <= 1e-12
        assert res.dual_objective == pytest.approx(-math.sqrt(2))

    def test_equality_perturbation(self):
        duals = Duals(eq=np.array([-1.0]), ineq=np.zeros(0), lower=np.zeros(2), upper=np.zeros(2))
        exact = kkt_residuals(split_sum(), result([0.5, 0.5], duals))
        assert exact.equality <= 1e-12
        assert exact.stationarity <= 1e-12
        moved = kkt_residuals(split_sum(), result([0.5, 0.501], duals))
        assert moved.equality == pytest.approx(1e-3, rel=1e-6)
        assert moved.stationarity == pytest.approx(2e-3, rel=1e-6)

    def test_wrong_sign_multiplier_is_dual_infeasible(self):
        duals = Duals(eq=np.zeros(0), ineq=np.zeros(0), lower=np.array([-6.0]), upper=np.zeros(1))
        res = kkt_residuals(bounded_square(), result([3.0], duals))
        assert res.dual_infeasibility == pytest.approx(6.0)
        assert res.stationarity == pytest.approx(12.0)

    def test_dimension_mismatch(self):
        duals = Duals(eq=np.zeros(1), ineq=np.zeros(0), lower=np.zeros(1), upper=np.zeros(1))
        with pytest.raises(DimensionMismatchError):
            kkt_residuals(bounded_square(), result([3.0], duals))
        with pytest.raises(DimensionMismatchError):
            kkt_residuals(fixed_cone(), result([0.0, 1.0, 1.0], replace(duals, eq=np.zeros(0),
                                                                         lower=np.zeros(3), upper=np.zeros(3))))


class TestSolvedCases:
    @pytest.fixture(scope="class")
    def case9_check(self, case9):
        prog, _ = build_socp(case9)
        solved = solve(prog)
        return prog, solved, kkt_residuals(prog, solved)

    def test_primal_feasible(self, case9_check):
        _, _, res = case9_check
        assert res.primal <= 1e-6

    def test_stationary(self, case9_check):
        _, _, res = case9_check
        assert res.stationarity_rel <= 1e-5
        assert res.dual_infeasibility <= 1e-6

    def test_weak_duality(self, case9_check):
        _, solved, res = case9_check
        assert res.primal_objective == pytest.approx(solved.objective)
        assert abs(res.duality_gap) <= 1e-4 * (1.0 + abs(res.primal_objective))

    def test_to_dict(self, case9_check):
        _, _, res = case9_check
        listing = res.to_dict()
        assert set(listing) >= {"equality", "cone", "stationarity", "duality_gap"}
