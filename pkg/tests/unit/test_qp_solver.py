"""
凸 QP 求解服务单元测试
"""

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from src.core.errors import ConfigError
from src.core.splitting import QpInstance, build_qp
from src.services.qp_solver import (
    KktResiduals,
    QpSolver,
    QpStatus,
    kkt_certified,
    kkt_residuals,
    qp_solve,
)
from tests.conftest import random_problem


pytestmark = [pytest.mark.unit, pytest.mark.qp]


def random_feasible_qp(rng: np.random.Generator, m: int, k: int):
    """随机生成严格可行的凸 QP，同时返回一个可行点"""
    B = rng.normal(size=(m, m))
    P = B @ B.T + 0.1 * np.eye(m)
    q = rng.normal(size=m)
    A = rng.normal(size=(k, m))
    v_feasible = rng.uniform(-0.5, 0.5, size=m)
    b = A @ v_feasible + rng.uniform(0.1, 1.0, size=k)
    lb = np.full(m, -1.0)
    ub = np.full(m, 1.0)
    return QpInstance(P=P, q=q, A_in=A, b_in=b, lb=lb, ub=ub), v_feasible


class TestSmallExamples:
    """测试可手算的小问题"""

    def test_interior_minimum(self):
        """测试 min (u-2)² s.t. u ≤ 3 的解为 u = 2"""
        inst = QpInstance(P=[[2.0]], q=[-4.0], const=4.0, ub=[3.0])
        sol = QpSolver().solve(inst)
        assert sol.status is QpStatus.OPTIMAL
        assert sol.v[0] == pytest.approx(2.0, abs=1e-6)
        assert sol.objective == pytest.approx(0.0, abs=1e-9)
        assert abs(sol.bound_duals[0]) <= 1e-6

    def test_active_lower_bound(self):
        """测试 min u² s.t. u ≥ 0.5 的解与界乘子"""
        inst = QpInstance(P=[[2.0]], q=[0.0], lb=[0.5])
        sol = qp_solve(inst)
        assert sol.is_optimal
        assert sol.v[0] == pytest.approx(0.5, abs=1e-6)
        # 负值表示下界有效
        assert sol.bound_duals[0] == pytest.approx(-1.0, abs=1e-5)

    def test_active_row(self):
        """测试 min ½‖v-[1,1]‖² s.t. v1+v2 ≤ 1 的解为 [0.5, 0.5]"""
        inst = QpInstance(P=np.eye(2), q=[-1.0, -1.0], A_in=[[1.0, 1.0]], b_in=[1.0])
        sol = QpSolver().solve(inst)
        assert sol.is_optimal
        assert np.allclose(sol.v, [0.5, 0.5], atol=1e-6)
        assert sol.duals[0] == pytest.approx(0.5, abs=1e-5)

    def test_warm_start_same_answer(self):
        inst = QpInstance(P=np.eye(2), q=[-1.0, -1.0], A_in=[[1.0, 1.0]], b_in=[1.0])
        solver = QpSolver()
        cold = solver.solve(inst)
        warm = solver.solve(inst, v0=np.array([0.5, 0.5]))
        assert np.allclose(cold.v, warm.v, atol=1e-6)


class TestFailureStatus:
    """测试不可行与无界"""

    def test_infeasible(self):
        """测试 u ≤ 0 且 u ≥ 1"""
        inst = QpInstance(P=[[1.0]], q=[0.0], A_in=[[1.0]], b_in=[0.0], lb=[1.0])
        sol = QpSolver().solve(inst)
        assert sol.status is QpStatus.INFEASIBLE
        assert not sol.is_optimal
        assert np.all(np.isnan(sol.v))

    def test_unbounded(self):
        """测试 min -u 无约束"""
        inst = QpInstance(P=[[0.0]], q=[-1.0])
        sol = QpSolver().solve(inst)
        assert sol.status is QpStatus.UNBOUNDED


class TestKktCertificate:
    """测试 KKT 证书"""

    def test_exact_point_certified(self):
        inst = QpInstance(P=[[2.0]], q=[0.0], lb=[0.5])
        residuals = kkt_residuals(inst, np.array([0.5]), np.zeros(0), np.array([-1.0]))
        assert residuals.worst() == pytest.approx(0.0, abs=1e-15)
        assert kkt_certified(inst, np.array([0.5]), np.zeros(0), residuals, 1e-8)

    def test_wrong_sign_rejected(self):
        """测试无界一侧出现乘子时不通过"""
        inst = QpInstance(P=[[2.0]], q=[0.0], lb=[0.5])
        residuals = kkt_residuals(inst, np.array([0.5]), np.zeros(0), np.array([1.0]))
        assert residuals.dual_inf >= 1.0
        assert not kkt_certified(inst, np.array([0.5]), np.zeros(0), residuals, 1e-8)

    def test_non_finite_point(self):
        inst = QpInstance(P=[[2.0]], q=[0.0])
        residuals = kkt_residuals(inst, np.array([np.nan]), np.zeros(0), np.zeros(1))
        assert residuals == KktResiduals(np.inf, np.inf, np.inf)
        assert not kkt_certified(inst, np.array([np.nan]), np.zeros(0), residuals, 1e-8)

    def test_primal_violation_measured(self):
        inst = QpInstance(P=np.eye(2), q=[0.0, 0.0], A_in=[[1.0, 1.0]], b_in=[1.0])
        residuals = kkt_residuals(inst, np.array([1.0, 1.0]), np.zeros(1), np.zeros(2))
        assert residuals.primal_inf == pytest.approx(1.0)


class TestRandomProblems:
    """测试随机可行问题"""

    @pytest.mark.parametrize('seed', range(8))
    def test_not_worse_than_feasible_points(self, seed):
        """测试最优值不劣于随机可行点"""
        rng = np.random.default_rng(seed)
        inst, v_feasible = random_feasible_qp(rng, m=5, k=3)
        sol = QpSolver().solve(inst)
        assert sol.is_optimal
        assert sol.kkt_residuals.worst() <= 1e-6
        best = sol.objective
        assert best <= inst.objective(v_feasible) + 1e-7
        checked = 0
        for _ in range(200):
            w = v_feasible + rng.normal(scale=0.2, size=5)
            if np.all(inst.A_in @ w <= inst.b_in) and np.all(np.abs(w) <= 1.0):
                checked += 1
                assert best <= inst.objective(w) + 1e-7
        assert checked > 0


class TestSolverConfig:
    """测试求解器参数"""

    def test_invalid_tol(self):
        with pytest.raises(ConfigError):
            QpSolver(tol=0.0)

    def test_invalid_max_iter(self):
        with pytest.raises(ConfigError):
            QpSolver(max_iter=0)

    def test_from_config(self, default_config):
        solver = QpSolver.from_config(default_config)
        assert solver.tol == pytest.approx(default_config.get('qp.tol', 1e-8))


class TestKktProperty:
    """测试每个 optimal 返回的绝对 KKT 残差"""

    @settings(max_examples=100, deadline=None)
    @given(
        seed=st.integers(min_value=0, max_value=2**32 - 1),
        m=st.integers(min_value=1, max_value=6),
        k=st.integers(min_value=0, max_value=4),
    )
    def test_random_feasible(self, seed, m, k):
        rng = np.random.default_rng(seed)
        inst, v_feasible = random_feasible_qp(rng, m=m, k=k)
        sol = QpSolver().solve(inst)
        assert sol.is_optimal
        assert sol.kkt_residuals.worst() <= 1e-8
        assert sol.objective <= inst.objective(v_feasible) + 1e-7

    @settings(max_examples=100, deadline=None)
    @given(
        seed=st.integers(min_value=0, max_value=2**32 - 1),
        n=st.integers(min_value=1, max_value=5),
        n_cont=st.integers(min_value=0, max_value=2),
        rho=st.floats(min_value=1.0, max_value=1e4),
    )
    def test_admm_subproblems(self, seed, n, n_cont, rho):
        """测试第二块子问题（z 无界、u 有界）"""
        rng = np.random.default_rng(seed)
        p = random_problem(rng, n, n_cont=n_cont)
        x = rng.integers(0, 2, size=n).astype(float)
        y = rng.normal(scale=0.1, size=n)
        lam = rng.normal(size=n)
        sol = QpSolver().solve(build_qp(p, x, y, lam, rho))
        assert sol.is_optimal
        assert sol.kkt_residuals.worst() <= 1e-8
