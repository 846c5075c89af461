"""
凸二次规划求解服务

以 OSQP 为后端求解 min ½vᵀPv + qᵀv  s.t. A_in v ≤ b_in, lb ≤ v ≤ ub，
随后用有效集 KKT 方程组精修，并用独立的 KKT 证书判定最优性。
"""

from dataclasses import dataclass, field
from enum import Enum
from typing import List, Optional, Tuple

import numpy as np
import osqp
from scipy import sparse

from ..core.errors import ConfigError
from ..core.splitting import QpInstance
from ..utils.logger import get_logger


class QpStatus(str, Enum):
    """QP 求解状态"""
    OPTIMAL = 'optimal'
    INFEASIBLE = 'infeasible'
    UNBOUNDED = 'unbounded'
    MAX_ITER = 'max_iter'


@dataclass(frozen=True)
class KktResiduals:
    """
    KKT 残差（均为 ∞ 范数）

    Attributes:
        primal_inf: 约束违反量
        dual_inf: 平稳性残差与乘子符号违反量
        comp_slack: 互补松弛残差
    """
    primal_inf: float
    dual_inf: float
    comp_slack: float

    def as_tuple(self) -> Tuple[float, float, float]:
        return (self.primal_inf, self.dual_inf, self.comp_slack)

    def worst(self) -> float:
        """三项中的最大值"""
        return max(self.as_tuple())


INFINITE_RESIDUALS = KktResiduals(np.inf, np.inf, np.inf)


@dataclass
class QpSolution:
    """
    QP 求解结果

    Attributes:
        v: 原始解
        duals: 不等式行乘子（≥ 0）
        bound_duals: 变量界乘子，正值对应上界有效，负值对应下界有效
        status: 求解状态
        kkt_residuals: KKT 残差
        objective: 目标值（含常数）
        iterations: 后端迭代次数
        refined: 是否采用了有效集精修的结果
    """
    v: np.ndarray
    duals: np.ndarray
    bound_duals: np.ndarray
    status: QpStatus
    kkt_residuals: KktResiduals = INFINITE_RESIDUALS
    objective: float = np.nan
    iterations: int = 0
    refined: bool = False
    info: dict = field(default_factory=dict)

    @property
    def is_optimal(self) -> bool:
        return self.status is QpStatus.OPTIMAL


def _finite_max(values: np.ndarray) -> float:
    finite = np.abs(values[np.isfinite(values)])
    return float(finite.max()) if finite.size else 0.0


def kkt_residuals(
    inst: QpInstance,
    v: np.ndarray,
    duals: np.ndarray,
    bound_duals: np.ndarray
) -> KktResiduals:
    """
    计算 KKT 残差

    平稳性: Pv + q + A_inᵀμ + ν = 0，其中 ν 为界乘子（上界部分 ≥ 0，下界部分 ≤ 0）

    Args:
        inst: QP 实例
        v: 原始解
        duals: 不等式乘子 μ
        bound_duals: 界乘子 ν

    Returns:
        KKT 残差
    """
    v = np.asarray(v, dtype=float)
    mu = np.asarray(duals, dtype=float)
    nu = np.asarray(bound_duals, dtype=float)
    if not (np.all(np.isfinite(v)) and np.all(np.isfinite(mu)) and np.all(np.isfinite(nu))):
        return INFINITE_RESIDUALS

    primal = 0.0
    comp = 0.0
    if inst.n_ineq:
        slack = inst.b_in - inst.A_in @ v
        primal = max(primal, float(np.max(np.maximum(-slack, 0.0))))
        comp = max(comp, float(np.max(np.abs(np.maximum(mu, 0.0) * slack))))

    finite_ub = np.isfinite(inst.ub)
    finite_lb = np.isfinite(inst.lb)
    if finite_ub.any():
        primal = max(primal, float(np.max(np.maximum(v[finite_ub] - inst.ub[finite_ub], 0.0))))
    if finite_lb.any():
        primal = max(primal, float(np.max(np.maximum(inst.lb[finite_lb] - v[finite_lb], 0.0))))

    nu_up = np.maximum(nu, 0.0)
    nu_low = np.maximum(-nu, 0.0)
    if finite_ub.any():
        comp = max(comp, float(np.max(nu_up[finite_ub] * np.abs(inst.ub[finite_ub] - v[finite_ub]))))
    if finite_lb.any():
        comp = max(comp, float(np.max(nu_low[finite_lb] * np.abs(v[finite_lb] - inst.lb[finite_lb]))))

    stationarity = inst.P @ v + inst.q + nu
    if inst.n_ineq:
        stationarity = stationarity + inst.A_in.T @ mu
    dual = float(np.max(np.abs(stationarity))) if stationarity.size else 0.0
    # 乘子符号：行乘子非负；无界一侧不允许出现乘子
    if mu.size:
        dual = max(dual, float(np.max(np.maximum(-mu, 0.0))))
    if (~finite_ub).any():
        dual = max(dual, float(np.max(nu_up[~finite_ub])))
    if (~finite_lb).any():
        dual = max(dual, float(np.max(nu_low[~finite_lb])))
    return KktResiduals(primal, dual, comp)


def kkt_certified(
    inst: QpInstance,
    v: np.ndarray,
    duals: np.ndarray,
    residuals: KktResiduals,
    tol: float
) -> bool:
    """
    判断 KKT 残差是否满足容差（决定返回状态）

    残差按问题数据的量级相对化（量级不足 1 时按 1 计）。ADMM 的凸子问题中
    P 含 ρI，ρ 可增长到 1e7，此时 Pv 的舍入误差本身就超过 1e-8，
    按绝对容差判定会把数值上已经最优的结果标成 max_iter。
    量级为 1 左右的问题上两者一致；求解器在绝对残差超过 tol 时总会再尝试有效集精修

    Args:
        inst: QP 实例
        v: 原始解
        duals: 不等式乘子
        residuals: KKT 残差
        tol: 容差

    Returns:
        是否通过证书检查
    """
    if not np.isfinite(residuals.worst()):
        return False
    v = np.asarray(v, dtype=float)
    mu = np.asarray(duals, dtype=float)
    primal_scale = max(
        1.0,
        _finite_max(inst.b_in),
        _finite_max(inst.A_in @ v) if inst.n_ineq else 0.0,
        _finite_max(inst.lb),
        _finite_max(inst.ub),
    )
    dual_scale = max(
        1.0,
        _finite_max(inst.q),
        _finite_max(inst.P @ v),
        _finite_max(inst.A_in.T @ mu) if inst.n_ineq else 0.0,
    )
    comp_scale = primal_scale * max(1.0, _finite_max(mu))
    return (
        residuals.primal_inf <= tol * primal_scale
        and residuals.dual_inf <= tol * dual_scale
        and residuals.comp_slack <= tol * comp_scale
    )


class QpSolver:
    """
    凸 QP 求解器

    OSQP（开启 polish）给出初解，小规模问题再做有效集精修；
    两者中通过 KKT 证书的结果被返回，都未通过时状态为 max_iter。
    """

    def __init__(
        self,
        tol: float = 1e-8,
        max_iter: int = 20000,
        refine_max_vars: int = 300,
        refine_max_steps: int = 100
    ):
        """
        初始化求解器

        Args:
            tol: KKT 证书容差
            max_iter: OSQP 最大迭代次数
            refine_max_vars: 无条件精修的变量个数上限（更大的问题只在绝对残差超过 tol 时精修）
            refine_max_steps: 有效集精修的最大换入换出次数
        """
        if not tol > 0:
            raise ConfigError(f'tol 必须为正: {tol}')
        if max_iter < 1:
            raise ConfigError(f'max_iter 必须 ≥ 1: {max_iter}')
        self.tol = float(tol)
        self.max_iter = int(max_iter)
        self.refine_max_vars = int(refine_max_vars)
        self.refine_max_steps = int(refine_max_steps)
        self.logger = get_logger()

    @classmethod
    def from_config(cls, config) -> 'QpSolver':
        """从配置的 qp 段构造"""
        section = config.section('qp')
        return cls(
            tol=section.get('tol', 1e-8),
            max_iter=section.get('max_iter', 20000),
            refine_max_vars=section.get('refine_max_vars', 300),
        )

    def solve(self, inst: QpInstance, v0: Optional[np.ndarray] = None) -> QpSolution:
        """
        求解 QP

        Args:
            inst: QP 实例
            v0: 可选的初始原始解

        Returns:
            求解结果
        """
        base = self._solve_osqp(inst, v0)
        if base.status in (QpStatus.INFEASIBLE, QpStatus.UNBOUNDED):
            return base

        if (
            base.status is QpStatus.OPTIMAL
            and inst.n_var > self.refine_max_vars
            and base.kkt_residuals.worst() <= self.tol
        ):
            return base

        refined = self._refine(inst, base.v)
        if refined is not None and refined.is_optimal:
            if not base.is_optimal or refined.kkt_residuals.worst() <= base.kkt_residuals.worst():
                refined.iterations = base.iterations
                return refined
        if not base.is_optimal:
            self.logger.debug(
                f'QP 未通过 KKT 证书: 残差={base.kkt_residuals.as_tuple()}, '
                f'osqp 状态={base.info.get("osqp_status")}'
            )
        return base

    def _solve_osqp(self, inst: QpInstance, v0: Optional[np.ndarray]) -> QpSolution:
        """调用 OSQP 并检查证书"""
        m = inst.n_var
        k = inst.n_ineq
        A = sparse.vstack(
            [sparse.csc_matrix(inst.A_in), sparse.identity(m, format='csc')],
            format='csc'
        )
        lower = np.concatenate([np.full(k, -np.inf), inst.lb])
        upper = np.concatenate([inst.b_in, inst.ub])

        solver = osqp.OSQP()
        solver.setup(
            P=sparse.triu(sparse.csc_matrix(inst.P), format='csc'),
            q=np.array(inst.q),
            A=A,
            l=lower,
            u=upper,
            eps_abs=self.tol,
            eps_rel=self.tol,
            max_iter=self.max_iter,
            polish=True,
            verbose=False,
        )
        if v0 is not None:
            solver.warm_start(x=np.asarray(v0, dtype=float))
        results = solver.solve()
        status_text = str(results.info.status)
        info = {'osqp_status': status_text}
        iterations = int(results.info.iter)

        if 'primal infeasible' in status_text:
            return self._failed(m, k, QpStatus.INFEASIBLE, iterations, info)
        if 'dual infeasible' in status_text:
            return self._failed(m, k, QpStatus.UNBOUNDED, iterations, info)
        if results.x is None or not np.all(np.isfinite(results.x)):
            return self._failed(m, k, QpStatus.MAX_ITER, iterations, info)

        v = np.array(results.x, dtype=float)
        y = np.array(results.y, dtype=float)
        duals = np.maximum(y[:k], 0.0)
        bound_duals = y[k:]
        return self._certify(inst, v, duals, bound_duals, iterations, info, refined=False)

    def _failed(self, m: int, k: int, status: QpStatus, iterations: int, info: dict) -> QpSolution:
        return QpSolution(
            v=np.full(m, np.nan),
            duals=np.full(k, np.nan),
            bound_duals=np.full(m, np.nan),
            status=status,
            iterations=iterations,
            info=info,
        )

    def _certify(
        self,
        inst: QpInstance,
        v: np.ndarray,
        duals: np.ndarray,
        bound_duals: np.ndarray,
        iterations: int,
        info: dict,
        refined: bool
    ) -> QpSolution:
        residuals = kkt_residuals(inst, v, duals, bound_duals)
        ok = kkt_certified(inst, v, duals, residuals, self.tol)
        return QpSolution(
            v=v,
            duals=duals,
            bound_duals=bound_duals,
            status=QpStatus.OPTIMAL if ok else QpStatus.MAX_ITER,
            kkt_residuals=residuals,
            objective=inst.objective(v),
            iterations=iterations,
            refined=refined,
            info=info,
        )

    def _stacked_constraints(self, inst: QpInstance) -> Tuple[np.ndarray, np.ndarray, List[Tuple[str, int]]]:
        """把不等式行与有限界统一为 Cv ≤ d，并记录每行来源"""
        m = inst.n_var
        rows = [inst.A_in]
        rhs = [inst.b_in]
        origin: List[Tuple[str, int]] = [('row', i) for i in range(inst.n_ineq)]
        eye = np.eye(m)
        upper_idx = np.flatnonzero(np.isfinite(inst.ub))
        lower_idx = np.flatnonzero(np.isfinite(inst.lb))
        if upper_idx.size:
            rows.append(eye[upper_idx])
            rhs.append(inst.ub[upper_idx])
            origin.extend(('ub', int(i)) for i in upper_idx)
        if lower_idx.size:
            rows.append(-eye[lower_idx])
            rhs.append(-inst.lb[lower_idx])
            origin.extend(('lb', int(i)) for i in lower_idx)
        return np.vstack(rows), np.concatenate(rhs), origin

    def _refine(self, inst: QpInstance, v_guess: np.ndarray) -> Optional[QpSolution]:
        """
        有效集精修

        从初解的近似有效约束出发，反复求解等式约束 KKT 方程组，
        移出负乘子、加入违反的约束，直到乘子非负且原始可行。

        Args:
            inst: QP 实例
            v_guess: 初解

        Returns:
            精修结果；方程组无法给出一致解时返回 None
        """
        m = inst.n_var
        C, d, origin = self._stacked_constraints(inst)
        n_rows = d.shape[0]
        scale = max(1.0, _finite_max(d), _finite_max(inst.q))
        activity_tol = 1e-6 * scale
        sign_tol = 1e-12 * scale

        if n_rows:
            slack = d - C @ v_guess
            working = [int(i) for i in np.flatnonzero(slack <= activity_tol)]
        else:
            working = []

        v = np.asarray(v_guess, dtype=float)
        multipliers = np.zeros(n_rows)
        for _ in range(self.refine_max_steps):
            n_w = len(working)
            C_w = C[working] if n_w else np.zeros((0, m))
            kkt = np.block([
                [inst.P, C_w.T],
                [C_w, np.zeros((n_w, n_w))],
            ])
            rhs = np.concatenate([-inst.q, d[working] if n_w else np.zeros(0)])
            sol, *_ = np.linalg.lstsq(kkt, rhs, rcond=None)
            v = sol[:m]
            mu_w = sol[m:]

            if n_w and mu_w.min() < -sign_tol:
                working.pop(int(np.argmin(mu_w)))
                continue
            if n_rows:
                violation = C @ v - d
                worst = int(np.argmax(violation))
                if violation[worst] > sign_tol and worst not in working:
                    working.append(worst)
                    continue
            multipliers = np.zeros(n_rows)
            if n_w:
                multipliers[working] = np.maximum(mu_w, 0.0)
            break
        else:
            return None

        duals = np.zeros(inst.n_ineq)
        bound_duals = np.zeros(m)
        for idx, (kind, j) in enumerate(origin):
            if kind == 'row':
                duals[j] = multipliers[idx]
            elif kind == 'ub':
                bound_duals[j] += multipliers[idx]
            else:
                bound_duals[j] -= multipliers[idx]
        solution = self._certify(inst, v, duals, bound_duals, 0, {'osqp_status': 'refined'}, refined=True)
        return solution


def qp_solve(
    inst: QpInstance,
    tol: float = 1e-8,
    max_iter: int = 20000,
    v0: Optional[np.ndarray] = None
) -> QpSolution:
    """
    便捷函数：求解单个 QP

    Args:
        inst: QP 实例
        tol: KKT 容差
        max_iter: 最大迭代次数
        v0: 可选初始解

    Returns:
        求解结果
    """
    return QpSolver(tol=tol, max_iter=max_iter).solve(inst, v0)
