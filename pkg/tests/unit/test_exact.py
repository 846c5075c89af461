"""
精确参考求解与评价指标单元测试
"""

import numpy as np
import pytest

from src.core.bin_packing import bp_to_mbo
from src.core.errors import SizeGuardError
from src.core.exact import continuous_lower_bound, exact_mbo_solve
from src.core.knapsack import misk_to_mbo
from src.core.metrics import gap
from src.core.problem import MboProblem
from src.data.instances import BpInstance, MiskInstance
from src.data.toy_problems import (
    equality_inequality_problem,
    mixed_continuous_problem,
    three_bit_inequality_problem,
)


pytestmark = pytest.mark.unit


class TestExactMboSolve:
    """测试枚举求全局最优"""

    def test_mixed_problem(self, qp_solver):
        result = exact_mbo_solve(mixed_continuous_problem(), qp_solver)
        assert result.feasible
        assert result.value == pytest.approx(1.0, abs=1e-6)
        assert result.point.x.tolist() == [1, 0, 0]
        assert result.point.u[0] == pytest.approx(2.0, abs=1e-6)
        assert result.n_qp_solves >= 1

    def test_pure_binary_tie_break(self):
        """测试最优值相同时取枚举序最小的 [0, 0, 1]"""
        result = exact_mbo_solve(three_bit_inequality_problem(1))
        assert result.value == pytest.approx(1.0)
        assert result.point.x.tolist() == [0, 0, 1]

    def test_equality_problem(self):
        result = exact_mbo_solve(equality_inequality_problem())
        assert result.value == pytest.approx(1.0)
        assert result.point.x.tolist() == [0, 1, 0]

    def test_bin_packing(self):
        p, _ = bp_to_mbo(BpInstance(n=2, m=2, cap=40, w=(20, 20)))
        assert exact_mbo_solve(p).value == pytest.approx(1.0)

    def test_knapsack(self, qp_solver):
        p, _ = misk_to_mbo(MiskInstance(K=1, T=1, P_cap=5.0, S=[1.0], C=[[-10.0]], D=[[5.0]]))
        assert exact_mbo_solve(p, qp_solver).value == pytest.approx(-9.0, abs=1e-6)

    def test_infeasible(self):
        p = MboProblem.build(Q=np.zeros((1, 1)), a=[1.0], G_in=[[1.0]], h_in=[-1.0])
        result = exact_mbo_solve(p)
        assert not result.feasible
        assert result.point is None
        assert result.value == np.inf

    def test_size_guard(self):
        p = MboProblem.build(Q=np.zeros((4, 4)), a=np.zeros(4))
        with pytest.raises(SizeGuardError):
            exact_mbo_solve(p, max_bits=3)


class TestContinuousLowerBound:
    """测试连续部分下界"""

    def test_bound_tightened_by_row(self):
        p = mixed_continuous_problem()
        assert continuous_lower_bound(p, np.array([1.0, 0.0, 0.0])) == pytest.approx(-20.0)

    def test_bound_below_optimum(self, qp_solver):
        p = mixed_continuous_problem()
        result = exact_mbo_solve(p, qp_solver)
        x = result.point.x.astype(float)
        assert float(x @ p.Q @ x + p.a @ x) + continuous_lower_bound(p, x) <= result.value + 1e-9


class TestGap:
    """测试相对间隙"""

    def test_zero_gap(self):
        assert gap(1.0, 1.0) == 0.0

    def test_relative(self):
        assert gap(2.0, 1.0) == pytest.approx(1.0)
        assert gap(-8.0, -10.0) == pytest.approx(0.2)

    def test_zero_reference(self):
        assert gap(0.0, 0.0) == 0.0
        assert gap(1e-10, 0.0) == pytest.approx(1.0)
