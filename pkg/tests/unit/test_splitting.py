"""
分裂子问题单元测试
"""

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from src.core.errors import DimensionError
from src.core.problem import MboProblem
from src.core.splitting import (
    QuboInstance,
    build_qp,
    build_qubo,
    build_restricted_qp,
    update_dual,
    update_y,
)
from src.data.toy_problems import equality_inequality_problem, mixed_continuous_problem, split_equality_problem
from tests.conftest import random_problem


pytestmark = pytest.mark.unit


def first_block_objective(p: MboProblem, s, z, y, lam, rho, c) -> float:
    """逐项计算第一块目标 q(x) + (c/2)‖Gx-b‖² + λᵀx + (ρ/2)‖x-z-y‖²"""
    s = np.asarray(s, dtype=float)
    value = float(s @ p.Q @ s + p.a @ s + lam @ s + 0.5 * rho * np.sum((s - z - y) ** 2))
    if p.has_equalities:
        value += 0.5 * c * float(np.sum((p.G_eq @ s - p.b_eq) ** 2))
    return value


def second_block_objective(p: MboProblem, v, x, y, lam, rho) -> float:
    """逐项计算第二块目标 φ(u) - λᵀz + (ρ/2)‖x-z-y‖²"""
    n = p.n_bin
    z, u = v[:n], v[n:]
    phi = float(0.5 * u @ p.P_u @ u + p.r_u @ u + p.c_u)
    return phi - float(lam @ z) + 0.5 * rho * float(np.sum((x - z - y) ** 2))


class TestQuboInstance:
    """测试 QUBO 实例"""

    def test_energy(self):
        qubo = QuboInstance(Qm=[[1.0, 0.5], [0.5, 2.0]], lin=[-1.0, 0.0], off=3.0)
        assert qubo.energy([1, 1]) == pytest.approx(1.0 + 1.0 + 2.0 - 1.0 + 3.0)

    def test_energies_match_energy(self):
        qubo = QuboInstance(Qm=[[1.0, -2.0], [-2.0, 0.5]], lin=[0.3, -0.7], off=0.1)
        states = np.array([[0, 0], [0, 1], [1, 0], [1, 1]], dtype=float)
        batch = qubo.energies(states)
        assert np.allclose(batch, [qubo.energy(s) for s in states], atol=1e-12)

    def test_asymmetric_rejected(self):
        with pytest.raises(ValueError):
            QuboInstance(Qm=[[0.0, 1.0], [0.0, 0.0]], lin=[0.0, 0.0])

    def test_wrong_length(self):
        qubo = QuboInstance(Qm=np.eye(2), lin=[0.0, 0.0])
        with pytest.raises(DimensionError):
            qubo.energy([1, 0, 1])


class TestBuildQubo:
    """测试第一块子问题"""

    def test_zero_data(self):
        p = MboProblem.build(Q=np.zeros((3, 3)), a=np.zeros(3))
        qubo = build_qubo(p, np.zeros(3), np.zeros(3), np.zeros(3), rho=4.0, c=0.0)
        assert np.array_equal(qubo.Qm, 2.0 * np.eye(3))
        assert np.array_equal(qubo.lin, np.zeros(3))
        assert qubo.off == 0.0

    def test_split_equality_first_iteration(self):
        """测试 z = 1 时两个比特串的能量为 50 与 -2"""
        p = split_equality_problem()
        qubo = build_qubo(p, [1.0], [0.0], [0.0], rho=100.0, c=0.0)
        assert qubo.energy([0]) == pytest.approx(50.0)
        assert qubo.energy([1]) == pytest.approx(-2.0)

    def test_equality_offset(self):
        """测试等式罚项常数 (c/2)‖b‖²"""
        p = equality_inequality_problem()
        qubo = build_qubo(p, np.zeros(3), np.zeros(3), np.zeros(3), rho=1001.0, c=900.0)
        assert qubo.off == pytest.approx(450.0)

    def test_invalid_rho(self):
        p = split_equality_problem()
        with pytest.raises(ValueError):
            build_qubo(p, [0.0], [0.0], [0.0], rho=0.0, c=0.0)

    def test_dimension_mismatch(self):
        p = split_equality_problem()
        with pytest.raises(DimensionError):
            build_qubo(p, [0.0, 1.0], [0.0], [0.0], rho=1.0, c=0.0)

    @settings(max_examples=100, deadline=None)
    @given(
        seed=st.integers(min_value=0, max_value=2**32 - 1),
        n=st.integers(min_value=1, max_value=8),
        rho=st.floats(min_value=0.1, max_value=1e3),
        c=st.floats(min_value=0.0, max_value=1e3),
    )
    def test_energy_identity(self, seed, n, rho, c):
        """测试 QUBO 能量与逐项计算的第一块目标一致"""
        rng = np.random.default_rng(seed)
        p = random_problem(rng, n)
        z, y, lam = rng.normal(size=n), rng.normal(size=n), rng.normal(size=n)
        qubo = build_qubo(p, z, y, lam, rho, c)
        for _ in range(4):
            s = rng.integers(0, 2, size=n).astype(float)
            expected = first_block_objective(p, s, z, y, lam, rho, c)
            assert qubo.energy(s) == pytest.approx(expected, rel=1e-9, abs=1e-9)


class TestBuildQp:
    """测试第二块子问题"""

    def test_structure(self):
        p = mixed_continuous_problem()
        qp = build_qp(p, [1, 0, 0], np.zeros(3), np.zeros(3), rho=10.0)
        assert qp.n_var == 4
        # G_in 一行 + 联合约束一行
        assert qp.n_ineq == 2
        assert np.all(np.isneginf(qp.lb[:3]))
        assert np.array_equal(qp.P[:3, :3], 10.0 * np.eye(3))
        assert qp.P[3, 3] == pytest.approx(10.0)

    def test_unconstrained_minimizer_is_x(self):
        """测试无约束时最小点 z = x"""
        p = MboProblem.build(Q=np.zeros((2, 2)), a=np.zeros(2))
        x = np.array([1.0, 0.0])
        qp = build_qp(p, x, np.zeros(2), np.zeros(2), rho=3.0)
        v = np.linalg.solve(qp.P, -qp.q)
        assert np.allclose(v, x)

    @settings(max_examples=100, deadline=None)
    @given(
        seed=st.integers(min_value=0, max_value=2**32 - 1),
        n=st.integers(min_value=1, max_value=8),
        l=st.integers(min_value=0, max_value=3),
        rho=st.floats(min_value=0.1, max_value=1e3),
    )
    def test_objective_identity(self, seed, n, l, rho):
        """测试 QP 目标与逐项计算的第二块目标一致"""
        rng = np.random.default_rng(seed)
        p = random_problem(rng, n, n_cont=l)
        x = rng.integers(0, 2, size=n).astype(float)
        y, lam = rng.normal(size=n), rng.normal(size=n)
        qp = build_qp(p, x, y, lam, rho)
        for _ in range(4):
            v = rng.normal(size=n + l)
            expected = second_block_objective(p, v, x, y, lam, rho)
            assert qp.objective(v) == pytest.approx(expected, rel=1e-9, abs=1e-9)

    def test_restricted_qp_constant(self):
        """测试固定 x 后的连续子问题包含二进制部分的代价"""
        p = mixed_continuous_problem()
        qp = build_restricted_qp(p, [1, 0, 0])
        assert qp.objective([2.0]) == pytest.approx(1.0)
        assert qp.b_in[0] == pytest.approx(2.0)

    def test_restricted_qp_requires_continuous(self):
        p = equality_inequality_problem()
        with pytest.raises(DimensionError):
            build_restricted_qp(p, [1, 0, 0])


class TestUpdates:
    """测试第三块与对偶更新"""

    def test_y_zero_at_origin(self):
        y = update_y([1.0, 0.0], [1.0, 0.0], [0.0, 0.0], rho=5.0, beta=2.0)
        assert np.array_equal(y, [0.0, 0.0])

    @settings(max_examples=100, deadline=None)
    @given(
        seed=st.integers(min_value=0, max_value=2**32 - 1),
        rho=st.floats(min_value=0.1, max_value=1e3),
        beta=st.floats(min_value=0.1, max_value=1e3),
    )
    def test_y_first_order_condition(self, seed, rho, beta):
        """测试 (β+ρ)y - λ - ρ(x-z) = 0"""
        rng = np.random.default_rng(seed)
        x = rng.integers(0, 2, size=5).astype(float)
        z, lam = rng.normal(size=5), rng.normal(size=5)
        y = update_y(x, z, lam, rho, beta)
        scale = max(1.0, float(np.max(np.abs(lam + rho * (x - z)))))
        assert np.max(np.abs((beta + rho) * y - lam - rho * (x - z))) <= 1e-12 * scale

    def test_y_finite_difference_gradient(self):
        """测试数值梯度在更新点为 0"""
        x, z, lam = np.array([1.0, 0.0]), np.array([0.3, 0.2]), np.array([0.5, -1.0])
        rho, beta = 7.0, 3.0
        y = update_y(x, z, lam, rho, beta)

        def step(yv):
            return 0.5 * beta * yv @ yv - lam @ yv + 0.5 * rho * np.sum((x - z - yv) ** 2)

        h = 1e-6
        grad = [(step(y + h * e) - step(y - h * e)) / (2 * h) for e in np.eye(2)]
        assert np.allclose(grad, 0.0, atol=1e-6)

    def test_y_requires_positive_beta(self):
        with pytest.raises(ValueError):
            update_y([1.0], [0.0], [0.0], rho=1.0, beta=0.0)

    def test_dual_fixed_point(self):
        lam = np.array([1.5, -2.0])
        assert np.array_equal(update_dual(lam, [1, 0], [1.0, 0.0], [0.0, 0.0], 10.0), lam)

    def test_dual_one_step(self):
        lam = update_dual([0.0], [1.0], [0.7], [0.0], 100.0)
        assert lam[0] == pytest.approx(30.0)
