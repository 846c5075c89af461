"""
ADMM 求解引擎单元测试

小算例均使用固定 ρ、β 与精确枚举预言机
"""

import csv

import numpy as np
import pytest

from src.core.admm import (
    TRACE_HEADER,
    AdmmConfig,
    AdmmSolver,
    TerminationReason,
    polish,
    solve,
    write_trace_csv,
)
from src.core.errors import ConfigError, QpSolveError
from src.core.problem import AdmmMode, MboProblem
from src.data.toy_problems import (
    bounded_split_problem,
    equality_inequality_problem,
    mixed_continuous_problem,
    split_equality_problem,
    three_bit_inequality_problem,
    two_bit_inequality_problem,
)
from src.oracles import ExactOracle, NoiseSchedule, NoisyOracle, SimulatedAnnealingOracle
from tests.conftest import fixed_config


pytestmark = pytest.mark.unit


def trace_values(report):
    """去掉耗时后的迭代记录"""
    return [
        (t.k, t.objective, t.merit, t.r, t.rr, t.rho, t.beta, t.qubo_exact_gap, t.s)
        for t in report.trace
    ]


class TestSplitEquality:
    """单比特分裂问题"""

    def test_zero_start_stays_at_zero(self, exact_oracle):
        cfg = fixed_config(blocks=2, rho=100.0)
        report = solve(split_equality_problem(), cfg, exact_oracle)
        assert report.converged
        assert report.iterations == 1
        state = report.final_state
        assert state.x.tolist() == [0.0]
        assert state.z[0] == pytest.approx(0.0, abs=1e-6)
        assert state.lam[0] == pytest.approx(0.0, abs=1e-6)

    def test_half_start_reaches_optimum(self, exact_oracle):
        """测试 z0 = u0 = 0.5 时收敛到 x = z = 1、λ = 2"""
        cfg = fixed_config(blocks=2, rho=100.0, z0=[0.5], u0=[0.5])
        report = solve(split_equality_problem(), cfg, exact_oracle)
        assert report.termination_reason is TerminationReason.TOLERANCE
        state = report.final_state
        assert state.x.tolist() == [1.0]
        assert state.z[0] == pytest.approx(1.0, abs=1e-3)
        assert state.u[0] == pytest.approx(1.0, abs=1e-3)
        assert state.lam[0] == pytest.approx(2.0, abs=1e-3)
        assert report.best_point.x.tolist() == [1]
        assert report.best_objective == pytest.approx(-1.0, abs=1e-3)

    def test_unit_start(self, exact_oracle):
        """测试 z0 = u0 = 1 时停在 (1, 1, 2)"""
        cfg = fixed_config(blocks=2, rho=100.0, x0=[1], z0=[1.0], u0=[1.0])
        report = solve(split_equality_problem(), cfg, exact_oracle)
        state = report.final_state
        assert state.x.tolist() == [1.0]
        assert state.z[0] == pytest.approx(1.0, abs=1e-3)
        assert state.lam[0] == pytest.approx(2.0, abs=1e-3)


class TestBoundedSplit:
    """带下界的分裂问题"""

    def test_three_block_values(self, exact_oracle):
        report = solve(bounded_split_problem(), fixed_config(), exact_oracle)
        state = report.final_state
        assert state.x.tolist() == [1.0]
        assert state.z[0] == pytest.approx(0.998, abs=5e-3)
        assert state.y[0] == pytest.approx(0.002, abs=5e-3)
        assert state.lam[0] == pytest.approx(1.996, abs=5e-3)


class TestInequalityProblems:
    """纯二进制不等式问题"""

    def test_two_bit_three_block(self, exact_oracle):
        report = solve(two_bit_inequality_problem(), fixed_config(), exact_oracle)
        assert report.converged
        state = report.final_state
        assert state.x.tolist() == [0.0, 0.0]
        assert np.allclose(state.z, [0.5, 0.5], atol=5e-3)
        assert np.allclose(state.y, [-0.5, -0.5], atol=5e-3)
        assert report.trace[-1].r <= 1e-4
        assert report.trace[-1].rr == pytest.approx(np.sqrt(0.5), abs=5e-3)

    def test_two_bit_three_block_equal_penalties(self, exact_oracle):
        """测试 ρ = β 时每个比特的一次项始终为 +1，停在不可行的零点"""
        cfg = fixed_config(rho=1000.0, beta=1000.0)
        report = solve(two_bit_inequality_problem(), cfg, exact_oracle)
        assert report.converged
        assert report.final_state.x.tolist() == [0.0, 0.0]
        assert np.allclose(report.final_state.z, [0.5, 0.5], atol=5e-3)
        assert report.trace[-1].r <= 1e-4
        assert all(t.objective == 0.0 for t in report.trace)
        assert report.best_point.x.tolist() == [0, 0]
        assert not report.best_feasible

    def test_two_bit_two_block_alternates(self, exact_oracle):
        """测试 z 停在对称点 (1/2, 1/2)，x 在 [0,0] 与 [1,1] 之间交替"""
        cfg = fixed_config(blocks=2, max_iter=60)
        report = solve(two_bit_inequality_problem(), cfg, exact_oracle)
        assert not report.converged
        assert report.termination_reason is TerminationReason.MAX_ITER
        assert report.iterations == 60
        assert [t.objective for t in report.trace] == [0.0, 2.0] * 30
        assert np.allclose(report.final_state.z, [0.5, 0.5], atol=5e-3)
        assert report.trace[-1].r == pytest.approx(np.sqrt(0.5), abs=5e-3)

    def test_three_bit_first_projection(self, exact_oracle):
        """测试第一轮 z 为零点到约束集的投影"""
        cfg = fixed_config(max_iter=1)
        report = solve(three_bit_inequality_problem(1), cfg, exact_oracle)
        assert np.allclose(report.final_state.z, [0.39726, 0.17808, 0.42466], atol=1e-4)

    def test_three_bit_three_block(self, exact_oracle):
        report = solve(three_bit_inequality_problem(1), fixed_config(), exact_oracle)
        assert report.converged
        state = report.final_state
        assert state.x.tolist() == [0.0, 0.0, 0.0]
        assert np.allclose(state.y, -state.z, atol=1e-3)
        assert report.trace[-1].r <= 1e-4

    def test_three_bit_two_block(self, exact_oracle):
        report = solve(three_bit_inequality_problem(1), fixed_config(blocks=2), exact_oracle)
        assert report.converged
        assert report.final_state.x.tolist() == [1.0, 0.0, 1.0]
        assert report.final_state.y.tolist() == [0.0, 0.0, 0.0]

    @pytest.mark.parametrize('blocks', [2, 3])
    def test_three_bit_larger_cover(self, exact_oracle, blocks):
        """测试 b = 2 时两种变体都停在 [1,0,1]"""
        report = solve(three_bit_inequality_problem(2), fixed_config(blocks=blocks), exact_oracle)
        assert report.final_state.x.tolist() == [1.0, 0.0, 1.0]

    @pytest.mark.parametrize('blocks, expected', [(3, [0.0, 1.0, 0.0]), (2, [0.0, 1.0, 1.0])])
    def test_equality_inequality(self, exact_oracle, blocks, expected):
        """v 与 w 对称，平局按字典序取 w = 1"""
        report = solve(equality_inequality_problem(), fixed_config(blocks=blocks, c=900.0), exact_oracle)
        assert report.final_state.x.tolist() == expected
        if blocks == 3:
            assert report.best_feasible
            assert report.best_objective == pytest.approx(1.0)

    @pytest.mark.parametrize('blocks', [2, 3])
    def test_equality_inequality_larger_penalty(self, exact_oracle, blocks):
        report = solve(equality_inequality_problem(), fixed_config(blocks=blocks, c=1100.0), exact_oracle)
        assert report.final_state.x.tolist() == [0.0, 1.0, 0.0]


class TestMixedContinuous:
    """含连续变量的问题"""

    def test_three_block(self, exact_oracle):
        report = solve(mixed_continuous_problem(), fixed_config(c=900.0), exact_oracle)
        state = report.final_state
        assert state.x.tolist() == [1.0, 0.0, 0.0]
        assert state.u[0] == pytest.approx(2.0, abs=5e-3)
        assert np.allclose(state.y, 0.0, atol=5e-3)
        assert report.best_point.x.tolist() == [1, 0, 0]

    def test_two_block(self, exact_oracle):
        report = solve(mixed_continuous_problem(), fixed_config(blocks=2, c=900.0), exact_oracle)
        state = report.final_state
        assert state.x.tolist() == [1.0, 0.0, 1.0]
        assert state.u[0] == pytest.approx(1.0, abs=5e-3)

    def test_polish_gives_exact_optimum(self, exact_oracle):
        cfg = fixed_config(c=900.0, polish=True)
        report = solve(mixed_continuous_problem(), cfg, exact_oracle)
        assert report.polished.success
        assert report.polished.point.u[0] == pytest.approx(2.0, abs=1e-6)
        assert report.best_feasible


class TestNoisyRuns:
    """含噪预言机"""

    def test_zero_noise_matches_exact(self, exact_oracle):
        p = three_bit_inequality_problem(1)
        clean = solve(p, fixed_config(), exact_oracle)
        noisy = solve(p, fixed_config(), NoisyOracle(ExactOracle(), NoiseSchedule(p0=0.0)))
        assert trace_values(clean) == trace_values(noisy)

    @pytest.mark.slow
    def test_some_seed_finds_optimum(self):
        """测试 20 个种子中至少一个得到可行最优解"""
        p = three_bit_inequality_problem(1)
        oracle = NoisyOracle(ExactOracle(), NoiseSchedule(p0=0.5))
        found = []
        for seed in range(20):
            report = solve(p, fixed_config(seed=seed), oracle)
            if report.best_feasible and report.best_objective == pytest.approx(1.0):
                found.append(report.best_point.x.tolist())
        assert found
        assert all(x in ([1, 0, 0], [0, 0, 1]) for x in found)


class TestSolverBehaviour:
    """迭代规则与报告"""

    def test_deterministic(self, exact_oracle):
        p = mixed_continuous_problem()
        first = solve(p, fixed_config(c=900.0), exact_oracle)
        second = solve(p, fixed_config(c=900.0), exact_oracle)
        assert trace_values(first) == trace_values(second)

    def test_best_merit_is_earliest_minimum(self):
        oracle = NoisyOracle(ExactOracle(), NoiseSchedule(p0=0.5))
        report = solve(three_bit_inequality_problem(1), fixed_config(seed=3, max_iter=30), oracle)
        merits = report.merits
        assert report.best_merit == min(merits)
        assert report.best_iteration == merits.index(min(merits)) + 1

    def test_rho_schedule(self, exact_oracle):
        cfg = AdmmConfig(rho_init=10.0, rho_growth=2.0, rho_cap=100.0, beta_init=1.0, c=0.0, max_iter=10, eps=0.0)
        report = solve(two_bit_inequality_problem(), cfg, exact_oracle)
        rhos = [t.rho for t in report.trace]
        betas = [t.beta for t in report.trace]
        assert rhos[:4] == [10.0, 20.0, 40.0, 80.0]
        assert all(r <= 100.0 for r in rhos)
        assert all(a <= b for a, b in zip(rhos, rhos[1:]))
        assert all(a <= b for a, b in zip(betas, betas[1:]))

    def test_two_block_keeps_y_zero(self, exact_oracle):
        report = solve(two_bit_inequality_problem(), fixed_config(blocks=2, max_iter=10), exact_oracle)
        assert np.array_equal(report.final_state.y, [0.0, 0.0])
        assert all(t.r == t.rr for t in report.trace)

    def test_time_limit(self, exact_oracle):
        cfg = fixed_config(blocks=2, time_limit=1e-9)
        report = solve(two_bit_inequality_problem(), cfg, exact_oracle)
        assert report.termination_reason is TerminationReason.TIME_LIMIT
        assert report.iterations == 1

    def test_qubo_tracking_with_exact(self, exact_oracle):
        cfg = fixed_config(track_qubo_optimality=True, max_iter=5)
        report = solve(three_bit_inequality_problem(1), cfg, exact_oracle)
        assert all(t.qubo_exact_gap == 0.0 for t in report.trace)
        assert report.qubo_optimal_fraction == 1.0

    def test_qubo_tracking_with_sa(self):
        cfg = fixed_config(track_qubo_optimality=True, max_iter=5)
        oracle = SimulatedAnnealingOracle(sweeps=20, restarts=2)
        report = solve(three_bit_inequality_problem(1), cfg, oracle)
        assert all(t.qubo_exact_gap >= 0.0 for t in report.trace)
        assert 0.0 <= report.qubo_optimal_fraction <= 1.0

    def test_qubo_tracking_off(self, exact_oracle):
        report = solve(three_bit_inequality_problem(1), fixed_config(max_iter=3), exact_oracle)
        assert report.qubo_optimal_fraction is None
        assert report.trace[0].qubo_exact_gap is None

    def test_infeasible_convex_block(self, exact_oracle):
        p = MboProblem.build(
            Q=np.zeros((1, 1)),
            a=[0.0],
            P_u=[[1.0]],
            r_u=[0.0],
            L_z=[[0.0]],
            L_u=[[1.0]],
            h_l=[0.0],
            u_lb=[1.0],
            u_ub=[np.inf],
        )
        with pytest.raises(QpSolveError):
            solve(p, fixed_config(), exact_oracle)

    def test_report_to_dict(self, exact_oracle):
        report = solve(mixed_continuous_problem(), fixed_config(c=900.0, max_iter=3), exact_oracle)
        data = report.to_dict()
        assert data['termination_reason'] in ('max_iter', 'tolerance')
        assert data['config']['mode'] == 'three_block'
        assert data['oracle']['name'] == 'exact'
        assert len(data['trace']) == report.iterations

    def test_solver_uses_given_qp(self, exact_oracle, qp_solver):
        solver = AdmmSolver(fixed_config(max_iter=2), exact_oracle, qp_solver)
        assert solver.qp_solver is qp_solver
        assert solver.solve(two_bit_inequality_problem()).iterations >= 1


class TestTraceCsv:
    """迭代记录导出"""

    def test_header_and_rows(self, tmp_path, exact_oracle):
        report = solve(two_bit_inequality_problem(), fixed_config(blocks=2, max_iter=4), exact_oracle)
        path = tmp_path / 'out' / 'trace.csv'
        write_trace_csv(report.trace, str(path))
        with open(path, encoding='utf-8', newline='') as f:
            rows = list(csv.reader(f))
        assert rows[0] == TRACE_HEADER
        assert [int(row[0]) for row in rows[1:]] == [1, 2, 3, 4]
        assert float(rows[1][5]) == 1001.0
        assert rows[1][7] == ''


class TestPolish:
    """连续部分修复"""

    def test_identity_for_pure_binary(self, qp_solver):
        result = polish(two_bit_inequality_problem(), [0, 1], qp_solver)
        assert result.success
        assert result.status == 'identity'
        assert result.point.u.size == 0

    def test_infeasible_keeps_u(self, qp_solver):
        result = polish(bounded_split_problem(), [0], qp_solver, u=[0.7])
        assert not result.success
        assert result.status == 'infeasible'
        assert result.point.u.tolist() == [0.7]


class TestAdmmConfig:
    """ADMM 参数"""

    @pytest.mark.parametrize('field, value', [
        ('rho_init', 0.0),
        ('rho_growth', 0.9),
        ('beta_omega', 1.0),
        ('beta_gamma', 0.5),
        ('eps', -1.0),
        ('max_iter', 0),
        ('mu', 0.0),
        ('c', -1.0),
        ('mode', 'four_block'),
    ])
    def test_invalid_values(self, field, value):
        with pytest.raises(ConfigError):
            AdmmConfig(**{field: value})

    def test_cap_below_init(self):
        with pytest.raises(ConfigError):
            AdmmConfig(rho_init=10.0, rho_cap=1.0)
        assert AdmmConfig(rho_init=10.0, rho_cap=1.0, rho_fixed=True).rho_cap == 1.0

    def test_mode_from_string(self):
        assert AdmmConfig(mode='two_block').mode is AdmmMode.TWO_BLOCK

    def test_from_config_defaults(self, default_config):
        cfg = AdmmConfig.from_config(default_config)
        assert cfg.rho_init == 1.0e4
        assert cfg.c == 1.0e5
        assert cfg.three_block

    def test_from_config_overrides(self, default_config):
        cfg = AdmmConfig.from_config(default_config, mode='two_block', rho_init=5.0, beta_init=None)
        assert cfg.mode is AdmmMode.TWO_BLOCK
        assert cfg.rho_init == 5.0
        assert cfg.beta_init == 1.0e3

    def test_from_config_unknown_key(self, default_config):
        with pytest.raises(ConfigError):
            AdmmConfig.from_config(default_config, gamma=3.0)

    def test_to_dict_skips_starts(self):
        data = fixed_config(z0=[1.0]).to_dict()
        assert 'z0' not in data
        assert data['mode'] == 'three_block'

    def test_bad_start_vectors(self, exact_oracle):
        p = two_bit_inequality_problem()
        with pytest.raises(ConfigError):
            solve(p, fixed_config(x0=[0.5, 0.0]), exact_oracle)
        with pytest.raises(ConfigError):
            solve(p, fixed_config(z0=[0.0]), exact_oracle)
