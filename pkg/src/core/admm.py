"""
ADMM 求解引擎

两块 / 三块 ADMM 启发式:
    1. 第一块: 构造 QUBO 并交给预言机求 x
    2. 第二块: 求解凸 QP 得到 z 与 u
    3. 第三块（仅三块模式）: 闭式更新 y
    4. 对偶更新 λ
每轮记录目标值、评价值与残差，返回评价值最小的迭代点。
"""

import csv
import dataclasses
import os
import time
from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Dict, List, Optional

import numpy as np

from .errors import ConfigError, QpSolveError
from .problem import (
    AdmmMode,
    MboPoint,
    MboProblem,
    is_feasible,
    merit,
    objective,
    residuals,
)
from .splitting import build_qp, build_qubo, build_restricted_qp, update_dual, update_y
from ..oracles.base import IQuboOracle
from ..oracles.exact import ExactOracle, exact_solve
from ..services.qp_solver import QpSolver, QpStatus
from ..utils.logger import get_logger


TRACE_HEADER = ['k', 'objective', 'merit', 'r', 'rr', 'rho', 'beta', 'qubo_exact_gap', 'elapsed_seconds']


class TerminationReason(str, Enum):
    """终止原因"""
    MAX_ITER = 'max_iter'
    TOLERANCE = 'tolerance'
    TIME_LIMIT = 'time_limit'


@dataclass
class AdmmConfig:
    """
    ADMM 参数

    Attributes:
        mode: 两块或三块
        rho_init, rho_growth, rho_cap, rho_fixed: ρ 的初值、每轮倍增因子、上限、是否固定
        beta_init, beta_gamma, beta_omega, beta_fixed: β 的初值、放大因子 γ、比较因子 ω、是否固定
        c: 等式约束罚系数
        mu: 评价值中违反量的惩罚
        eps: 残差终止容差
        max_iter: 最大外层迭代次数
        time_limit: 墙钟时间上限（秒）
        seed: 预言机随机种子
        polish: 结束后是否修复最优点的连续部分
        merit_include_equalities: 评价值是否计入等式违反量
        track_qubo_optimality: 是否每轮用精确枚举检查预言机结果
        qubo_check_max_bits: 精确检查的规模上限
        x0, z0, u0, y0, lambda0: 可选的初始迭代（缺省为 0）
    """
    mode: AdmmMode = AdmmMode.THREE_BLOCK
    rho_init: float = 1.0e4
    rho_growth: float = 1.1
    rho_cap: float = 1.0e7
    rho_fixed: bool = False
    beta_init: float = 1.0e3
    beta_gamma: float = 2.0
    beta_omega: float = 0.5
    beta_fixed: bool = False
    c: float = 1.0e5
    mu: float = 1.0e3
    eps: float = 1.0e-4
    max_iter: int = 500
    time_limit: float = 3600.0
    seed: int = 0
    polish: bool = False
    merit_include_equalities: bool = False
    track_qubo_optimality: bool = False
    qubo_check_max_bits: int = 22
    x0: Optional[np.ndarray] = None
    z0: Optional[np.ndarray] = None
    u0: Optional[np.ndarray] = None
    y0: Optional[np.ndarray] = None
    lambda0: Optional[np.ndarray] = None

    def __post_init__(self):
        """验证数据"""
        try:
            self.mode = AdmmMode(self.mode)
        except ValueError as e:
            raise ConfigError(f'未知的模式: {self.mode}') from e
        checks = [
            (self.rho_init > 0, f'rho_init 必须为正: {self.rho_init}'),
            (self.rho_growth >= 1, f'rho_growth 必须 ≥ 1: {self.rho_growth}'),
            (self.rho_cap >= self.rho_init or self.rho_fixed, f'rho_cap 不能小于 rho_init: {self.rho_cap}'),
            (self.beta_init > 0, f'beta_init 必须为正: {self.beta_init}'),
            (self.beta_gamma >= 1, f'beta_gamma 必须 ≥ 1: {self.beta_gamma}'),
            (0 < self.beta_omega < 1, f'beta_omega 必须在 (0, 1) 内: {self.beta_omega}'),
            (self.c >= 0, f'c 不能为负: {self.c}'),
            (self.mu > 0, f'mu 必须为正: {self.mu}'),
            (self.eps >= 0, f'eps 不能为负: {self.eps}'),
            (int(self.max_iter) >= 1, f'max_iter 必须 ≥ 1: {self.max_iter}'),
            (self.time_limit > 0, f'time_limit 必须为正: {self.time_limit}'),
            (int(self.qubo_check_max_bits) >= 1, f'qubo_check_max_bits 必须 ≥ 1: {self.qubo_check_max_bits}'),
        ]
        for ok, message in checks:
            if not ok:
                raise ConfigError(message)
        self.max_iter = int(self.max_iter)
        self.seed = int(self.seed)

    @property
    def three_block(self) -> bool:
        return self.mode is AdmmMode.THREE_BLOCK

    @classmethod
    def from_config(cls, config, **overrides: Any) -> 'AdmmConfig':
        """
        由配置管理器的 admm 段构造，overrides 中非 None 的值覆盖配置

        Args:
            config: 配置管理器
            **overrides: 覆盖字段

        Returns:
            ADMM 参数
        """
        section = config.section('admm')
        names = {f.name for f in dataclasses.fields(cls)}
        values = {key: value for key, value in section.items() if key in names}
        values.update({key: value for key, value in overrides.items() if value is not None})
        unknown = set(values) - names
        if unknown:
            raise ConfigError(f'未知的参数: {sorted(unknown)}')
        return cls(**values)

    def replace(self, **changes: Any) -> 'AdmmConfig':
        """返回修改部分字段后的副本"""
        return dataclasses.replace(self, **changes)

    def to_dict(self) -> Dict[str, Any]:
        """导出为 JSON 友好的字典（不含初始迭代）"""
        data = {}
        for f in dataclasses.fields(self):
            if f.name in ('x0', 'z0', 'u0', 'y0', 'lambda0'):
                continue
            value = getattr(self, f.name)
            data[f.name] = value.value if isinstance(value, Enum) else value
        return data


@dataclass(frozen=True)
class TraceRecord:
    """
    单轮迭代记录

    Attributes:
        k: 迭代序号
        objective: 原问题目标值
        merit: 评价值
        r, rr: 残差
        rho, beta: 本轮使用的罚参数
        qubo_exact_gap: 预言机能量与精确最优能量之差（未检查时为 None）
        elapsed_seconds: 累计耗时
        s: 对偶残差 ρ‖z_k - z_{k-1}‖
    """
    k: int
    objective: float
    merit: float
    r: float
    rr: float
    rho: float
    beta: float
    qubo_exact_gap: Optional[float]
    elapsed_seconds: float
    s: float = 0.0

    def as_row(self) -> List[Any]:
        gap_value = '' if self.qubo_exact_gap is None else repr(self.qubo_exact_gap)
        return [
            self.k,
            repr(self.objective),
            repr(self.merit),
            repr(self.r),
            repr(self.rr),
            repr(self.rho),
            repr(self.beta),
            gap_value,
            f'{self.elapsed_seconds:.6f}',
        ]

    def to_dict(self) -> Dict[str, Any]:
        return dataclasses.asdict(self)


@dataclass
class AdmmState:
    """
    迭代状态

    Attributes:
        k: 已完成的迭代次数
        x, z, u, y, lam: 迭代向量
        rho, beta: 当前罚参数
        dual_residual: 最近一轮的对偶残差
        trace: 迭代记录
    """
    k: int
    x: np.ndarray
    z: np.ndarray
    u: np.ndarray
    y: np.ndarray
    lam: np.ndarray
    rho: float
    beta: float
    dual_residual: float = 0.0
    trace: List[TraceRecord] = field(default_factory=list)

    @property
    def x_bar(self) -> np.ndarray:
        """连续块 [z; u]"""
        return np.concatenate([self.z, self.u])

    def snapshot(self) -> 'AdmmState':
        """深拷贝"""
        return AdmmState(
            k=self.k,
            x=self.x.copy(),
            z=self.z.copy(),
            u=self.u.copy(),
            y=self.y.copy(),
            lam=self.lam.copy(),
            rho=self.rho,
            beta=self.beta,
            dual_residual=self.dual_residual,
            trace=list(self.trace),
        )

    def to_dict(self) -> Dict[str, Any]:
        return {
            'k': self.k,
            'x': [int(v) for v in self.x],
            'z': self.z.tolist(),
            'u': self.u.tolist(),
            'y': self.y.tolist(),
            'lambda': self.lam.tolist(),
            'rho': self.rho,
            'beta': self.beta,
            'dual_residual': self.dual_residual,
        }


@dataclass
class PolishResult:
    """
    连续部分修复结果

    Attributes:
        point: 修复后的点（失败时 u 保持原值）
        success: 连续子问题是否可解
        status: 连续子问题状态
    """
    point: MboPoint
    success: bool
    status: str

    def to_dict(self) -> Dict[str, Any]:
        return {'point': self.point.to_dict(), 'success': self.success, 'status': self.status}


@dataclass
class SolveReport:
    """
    求解报告

    Attributes:
        best_point: 评价值最小的迭代点
        best_merit, best_objective: 该点的评价值与目标值
        best_iteration: 该点所在的迭代序号
        best_feasible: 该点是否可行
        iterations: 完成的迭代次数
        converged: 是否因残差达到容差而终止
        trace: 迭代记录
        termination_reason: 终止原因
        final_state: 最后一轮的迭代状态
        block_seconds: 各块累计耗时
        qubo_optimal_fraction: 预言机给出精确最优的轮次比例（未检查时为 None）
        polished: 连续部分修复结果（未开启时为 None）
        runtime_seconds: 总耗时
    """
    best_point: MboPoint
    best_merit: float
    best_objective: float
    best_iteration: int
    best_feasible: bool
    iterations: int
    converged: bool
    trace: List[TraceRecord]
    termination_reason: TerminationReason
    final_state: AdmmState
    block_seconds: Dict[str, float]
    qubo_optimal_fraction: Optional[float] = None
    polished: Optional[PolishResult] = None
    runtime_seconds: float = 0.0
    config: Dict[str, Any] = field(default_factory=dict)
    oracle: Dict[str, Any] = field(default_factory=dict)

    @property
    def merits(self) -> List[float]:
        return [record.merit for record in self.trace]

    def to_dict(self) -> Dict[str, Any]:
        """导出为 JSON 友好的字典"""
        return {
            'best_point': self.best_point.to_dict(),
            'best_merit': self.best_merit,
            'best_objective': self.best_objective,
            'best_iteration': self.best_iteration,
            'best_feasible': self.best_feasible,
            'iterations': self.iterations,
            'converged': self.converged,
            'termination_reason': self.termination_reason.value,
            'final_state': self.final_state.to_dict(),
            'block_seconds': dict(self.block_seconds),
            'qubo_optimal_fraction': self.qubo_optimal_fraction,
            'polished': self.polished.to_dict() if self.polished else None,
            'runtime_seconds': self.runtime_seconds,
            'config': dict(self.config),
            'oracle': dict(self.oracle),
            'trace': [record.to_dict() for record in self.trace],
        }


def write_trace_csv(trace: List[TraceRecord], path: str) -> None:
    """
    导出迭代记录为 CSV

    Args:
        trace: 迭代记录
        path: 文件路径
    """
    directory = os.path.dirname(path)
    if directory:
        os.makedirs(directory, exist_ok=True)
    with open(path, 'w', encoding='utf-8', newline='') as f:
        writer = csv.writer(f)
        writer.writerow(TRACE_HEADER)
        for record in trace:
            writer.writerow(record.as_row())


def polish(
    p: MboProblem,
    x: np.ndarray,
    qp: QpSolver,
    u: Optional[np.ndarray] = None
) -> PolishResult:
    """
    固定 x，重新求解连续部分

    Args:
        p: 问题
        x: 二进制向量
        qp: QP 求解器
        u: 连续子问题不可行时保留的原连续值

    Returns:
        修复结果
    """
    fallback = np.zeros(p.n_cont) if u is None else np.asarray(u, dtype=float)
    point = MboPoint(x=x, u=fallback)
    if p.n_cont == 0:
        return PolishResult(point=point, success=True, status='identity')

    solution = qp.solve(build_restricted_qp(p, point.x), v0=fallback if u is not None else None)
    if solution.status is QpStatus.UNBOUNDED:
        raise QpSolveError('修复时连续子问题无界', solution)
    if solution.status is QpStatus.INFEASIBLE:
        return PolishResult(point=point, success=False, status=solution.status.value)
    return PolishResult(
        point=MboPoint(x=point.x, u=solution.v),
        success=True,
        status=solution.status.value,
    )


def _initial_vector(value: Optional[np.ndarray], size: int, name: str) -> np.ndarray:
    if value is None:
        return np.zeros(size)
    arr = np.array(value, dtype=float).reshape(-1)
    if arr.shape[0] != size:
        raise ConfigError(f'{name} 长度应为 {size}，实际为 {arr.shape[0]}')
    return arr


class AdmmSolver:
    """
    ADMM 启发式求解器

    一次 solve 调用是单线程且确定性的；不同求解器实例可以并发使用
    """

    def __init__(self, config: AdmmConfig, oracle: IQuboOracle, qp_solver: Optional[QpSolver] = None):
        """
        初始化

        Args:
            config: ADMM 参数
            oracle: QUBO 预言机
            qp_solver: QP 求解器（缺省使用默认参数）
        """
        self.config = config
        self.oracle = oracle
        self.qp_solver = qp_solver or QpSolver()
        self.logger = get_logger()

    def _initial_state(self, p: MboProblem) -> AdmmState:
        cfg = self.config
        n, l = p.n_bin, p.n_cont
        x = _initial_vector(cfg.x0, n, 'x0')
        if not np.all((x == 0) | (x == 1)):
            raise ConfigError('x0 的分量必须为 0 或 1')
        y = _initial_vector(cfg.y0, n, 'y0') if cfg.three_block else np.zeros(n)
        return AdmmState(
            k=0,
            x=x,
            z=_initial_vector(cfg.z0, n, 'z0'),
            u=_initial_vector(cfg.u0, l, 'u0'),
            y=y,
            lam=_initial_vector(cfg.lambda0, n, 'lambda0'),
            rho=float(cfg.rho_init),
            beta=float(cfg.beta_init),
        )

    def _qubo_gap(self, qubo, energy: float) -> Optional[float]:
        """预言机能量与精确最优能量之差"""
        cfg = self.config
        if not cfg.track_qubo_optimality or qubo.n > cfg.qubo_check_max_bits:
            return None
        if isinstance(self.oracle, ExactOracle):
            return 0.0
        _, best_energy = exact_solve(qubo, max_bits=cfg.qubo_check_max_bits)
        return max(0.0, energy - best_energy)

    def solve(self, p: MboProblem) -> SolveReport:
        """
        运行 ADMM

        Args:
            p: 问题

        Returns:
            求解报告
        """
        cfg = self.config
        n = p.n_bin
        state = self._initial_state(p)
        blocks = {'qubo': 0.0, 'convex': 0.0, 'y': 0.0}
        prev_norm = float(np.linalg.norm(state.x_bar))
        debug = self.logger.is_enabled_for('DEBUG')

        self.logger.info(
            f'ADMM 开始: 模式={cfg.mode.value}, n_bin={n}, n_cont={p.n_cont}, '
            f'预言机={self.oracle.name}, rho={cfg.rho_init}, beta={cfg.beta_init}, c={cfg.c}'
        )

        best_k = 0
        best_point: Optional[MboPoint] = None
        best_merit = np.inf
        best_objective = np.inf
        qubo_hits = 0
        qubo_checked = 0
        reason = TerminationReason.MAX_ITER
        start = time.perf_counter()

        for k in range(1, cfg.max_iter + 1):
            rho, beta = state.rho, state.beta

            tick = time.perf_counter()
            qubo = build_qubo(p, state.z, state.y, state.lam, rho, cfg.c)
            result = self.oracle.solve(qubo, k, cfg.seed)
            x = result.bits.astype(float)
            gap_value = self._qubo_gap(qubo, result.energy)
            blocks['qubo'] += time.perf_counter() - tick
            if gap_value is not None:
                qubo_checked += 1
                if gap_value <= 1e-9 * max(1.0, abs(result.energy)):
                    qubo_hits += 1

            tick = time.perf_counter()
            qp_instance = build_qp(p, x, state.y, state.lam, rho)
            solution = self.qp_solver.solve(qp_instance, v0=state.x_bar)
            blocks['convex'] += time.perf_counter() - tick
            if solution.status in (QpStatus.INFEASIBLE, QpStatus.UNBOUNDED):
                self.logger.error(f'第 {k} 轮凸子问题 {solution.status.value}，终止')
                raise QpSolveError(f'第 {k} 轮凸子问题 {solution.status.value}', solution)
            if not np.all(np.isfinite(solution.v)):
                raise QpSolveError(f'第 {k} 轮凸子问题数值失败', solution)
            if solution.status is QpStatus.MAX_ITER:
                self.logger.warning(
                    f'第 {k} 轮凸子问题未通过 KKT 证书，使用近似解: 残差={solution.kkt_residuals.as_tuple()}'
                )

            z_prev = state.z
            z = solution.v[:n]
            u = solution.v[n:]

            tick = time.perf_counter()
            y = update_y(x, z, state.lam, rho, beta) if cfg.three_block else np.zeros(n)
            blocks['y'] += time.perf_counter() - tick
            lam = update_dual(state.lam, x, z, y, rho)

            r, rr = residuals(x, z, y, cfg.mode)
            s = rho * float(np.linalg.norm(z - z_prev))
            point = MboPoint(x=x, u=u)
            obj_value = objective(p, point)
            merit_value = merit(p, point, cfg.mu, cfg.merit_include_equalities)
            elapsed = time.perf_counter() - start
            record = TraceRecord(
                k=k,
                objective=obj_value,
                merit=merit_value,
                r=r,
                rr=rr,
                rho=rho,
                beta=beta,
                qubo_exact_gap=gap_value,
                elapsed_seconds=elapsed,
                s=s,
            )
            state.trace.append(record)
            state.k, state.x, state.z, state.u, state.y, state.lam = k, x, z, u, y, lam
            state.dual_residual = s

            # 平局保留最早的迭代
            if merit_value < best_merit:
                best_k, best_point, best_merit, best_objective = k, point, merit_value, obj_value

            if debug:
                self.logger.iteration(
                    k, x=x.astype(int).tolist(), obj=float(obj_value), merit=float(merit_value),
                    r=float(r), rr=float(rr), s=float(s), rho=float(rho), beta=float(beta),
                )

            x_bar_norm = float(np.linalg.norm(state.x_bar))
            if cfg.three_block and not cfg.beta_fixed and x_bar_norm <= cfg.beta_omega * prev_norm:
                state.beta = beta * cfg.beta_gamma
            prev_norm = x_bar_norm
            if not cfg.rho_fixed:
                state.rho = min(rho * cfg.rho_growth, cfg.rho_cap)

            if r <= cfg.eps:
                reason = TerminationReason.TOLERANCE
                break
            if elapsed > cfg.time_limit:
                reason = TerminationReason.TIME_LIMIT
                break

        runtime = time.perf_counter() - start
        polished = None
        if cfg.polish:
            polished = polish(p, best_point.x, self.qp_solver, best_point.u)
            if not polished.success:
                self.logger.warning(f'连续部分修复失败: {polished.status}，保留原连续值')

        report = SolveReport(
            best_point=best_point,
            best_merit=best_merit,
            best_objective=best_objective,
            best_iteration=best_k,
            best_feasible=is_feasible(p, best_point),
            iterations=state.k,
            converged=reason is TerminationReason.TOLERANCE,
            trace=list(state.trace),
            termination_reason=reason,
            final_state=state.snapshot(),
            block_seconds=blocks,
            qubo_optimal_fraction=(qubo_hits / qubo_checked) if qubo_checked else None,
            polished=polished,
            runtime_seconds=runtime,
            config=cfg.to_dict(),
            oracle=self.oracle.describe(),
        )
        self.logger.info(
            f'ADMM 结束: 原因={reason.value}, 迭代={state.k}, 最优评价值={best_merit:.6g} '
            f'(第 {best_k} 轮), 可行={report.best_feasible}, 耗时={runtime:.3f}s'
        )
        return report


def solve(
    p: MboProblem,
    cfg: AdmmConfig,
    oracle: IQuboOracle,
    qp: Optional[QpSolver] = None
) -> SolveReport:
    """
    便捷函数：运行一次 ADMM

    Args:
        p: 问题
        cfg: ADMM 参数
        oracle: QUBO 预言机
        qp: QP 求解器

    Returns:
        求解报告
    """
    return AdmmSolver(cfg, oracle, qp).solve(p)
