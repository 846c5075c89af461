"""
精确参考求解

枚举全部二进制向量，先按二进制约束过滤；没有连续变量时直接比较目标值，
否则按目标下界从小到大对每个候选求解连续子问题并剪枝。
"""

from dataclasses import dataclass
from typing import List, Optional, Tuple

import numpy as np

from .errors import QpSolveError, SizeGuardError
from .problem import MboPoint, MboProblem
from .splitting import build_restricted_qp
from ..oracles.exact import index_to_bits, iter_bit_chunks
from ..services.qp_solver import QpSolver, QpStatus
from ..utils.logger import get_logger


# 精确求解的规模上限
EXACT_MAX_BITS = 22
# 约束判定容差
CONSTRAINT_TOL = 1e-9


@dataclass
class ExactResult:
    """
    精确求解结果

    Attributes:
        point: 最优点（不可行时为 None）
        value: 最优值 v*（不可行时为 +inf）
        feasible: 是否存在可行点
        n_candidates: 满足二进制约束的候选个数
        n_qp_solves: 求解连续子问题的次数
    """
    point: Optional[MboPoint]
    value: float
    feasible: bool
    n_candidates: int = 0
    n_qp_solves: int = 0


def _binary_mask(p: MboProblem, states: np.ndarray) -> np.ndarray:
    """满足等式、二进制不等式以及不含 u 的联合约束行的状态"""
    mask = np.ones(states.shape[0], dtype=bool)
    if p.has_equalities:
        mask &= np.all(np.abs(states @ p.G_eq.T - p.b_eq) <= CONSTRAINT_TOL, axis=1)
    if p.h_in.size:
        mask &= np.all(states @ p.G_in.T <= p.h_in + CONSTRAINT_TOL, axis=1)
    if p.h_l.size:
        pure = ~np.any(p.L_u != 0, axis=1) if p.n_cont else np.ones(p.h_l.shape[0], dtype=bool)
        if pure.any():
            mask &= np.all(states @ p.L_z[pure].T <= p.h_l[pure] + CONSTRAINT_TOL, axis=1)
    return mask


def _binary_cost(p: MboProblem, states: np.ndarray) -> np.ndarray:
    return np.einsum('bi,bi->b', states @ p.Q, states) + states @ p.a


def continuous_lower_bound(p: MboProblem, x: np.ndarray) -> float:
    """
    连续部分的下界

    ½uᵀP_u u ≥ 0，因此 φ(u) ≥ r_uᵀu + c_u；在由单变量约束行收紧的盒子上取最小

    Args:
        p: 问题
        x: 二进制向量

    Returns:
        下界（盒子为空时为 +inf）
    """
    lb = np.array(p.u_lb, dtype=float)
    ub = np.array(p.u_ub, dtype=float)
    if p.h_l.size:
        rhs = p.h_l - p.L_z @ x
        nonzero = p.L_u != 0
        singleton = np.flatnonzero(nonzero.sum(axis=1) == 1)
        for row in singleton:
            j = int(np.flatnonzero(nonzero[row])[0])
            coef = p.L_u[row, j]
            limit = rhs[row] / coef
            if coef > 0:
                ub[j] = min(ub[j], limit)
            else:
                lb[j] = max(lb[j], limit)
    if np.any(lb > ub + CONSTRAINT_TOL):
        return np.inf
    r = p.r_u
    terms = np.zeros_like(r)
    positive = r > 0
    negative = r < 0
    terms[positive] = r[positive] * lb[positive]
    terms[negative] = r[negative] * ub[negative]
    return float(terms.sum()) + p.c_u


def exact_mbo_solve(
    p: MboProblem,
    qp_solver: Optional[QpSolver] = None,
    max_bits: int = EXACT_MAX_BITS
) -> ExactResult:
    """
    枚举求原问题全局最优

    Args:
        p: 问题
        qp_solver: 连续子问题求解器（有连续变量时使用）
        max_bits: 规模上限

    Returns:
        精确求解结果；平局取枚举序最小的二进制向量
    """
    n = p.n_bin
    if n > max_bits:
        raise SizeGuardError(f'精确求解只支持 n_bin ≤ {max_bits}，当前 n_bin={n}')

    if p.n_cont == 0:
        return _solve_pure_binary(p)

    qp_solver = qp_solver or QpSolver()
    logger = get_logger()
    candidates: List[Tuple[float, int, float]] = []
    for start, states in iter_bit_chunks(n):
        mask = _binary_mask(p, states)
        if not mask.any():
            continue
        costs = _binary_cost(p, states)
        for offset in np.flatnonzero(mask):
            x = states[offset]
            bound = float(costs[offset]) + continuous_lower_bound(p, x)
            if bound < np.inf:
                candidates.append((bound, start + int(offset), float(costs[offset])))
    candidates.sort(key=lambda item: (item[0], item[1]))

    best_value = np.inf
    best_point: Optional[MboPoint] = None
    best_index = -1
    solves = 0
    for bound, index, _ in candidates:
        tol = 1e-9 * max(1.0, abs(best_value)) if np.isfinite(best_value) else 0.0
        if bound > best_value + tol:
            break
        x = index_to_bits(index, n).astype(float)
        solution = qp_solver.solve(build_restricted_qp(p, x))
        solves += 1
        if solution.status is QpStatus.INFEASIBLE:
            continue
        if solution.status is QpStatus.UNBOUNDED:
            raise QpSolveError('连续子问题无界，原问题无下界', solution)
        if solution.status is QpStatus.MAX_ITER:
            logger.warning(f'精确求解中连续子问题未通过 KKT 证书 (x 下标 {index})，使用近似解')
        value = solution.objective
        tie = 1e-9 * max(1.0, abs(value))
        if value < best_value - tie or (abs(value - best_value) <= tie and index < best_index):
            best_value = value
            best_point = MboPoint(x=x, u=solution.v)
            best_index = index

    return ExactResult(
        point=best_point,
        value=float(best_value),
        feasible=best_point is not None,
        n_candidates=len(candidates),
        n_qp_solves=solves,
    )


def _solve_pure_binary(p: MboProblem) -> ExactResult:
    """没有连续变量时的向量化枚举"""
    n = p.n_bin
    best_value = np.inf
    best_index = -1
    count = 0
    for start, states in iter_bit_chunks(n):
        mask = _binary_mask(p, states)
        if not mask.any():
            continue
        count += int(mask.sum())
        values = _binary_cost(p, states) + p.c_u
        values[~mask] = np.inf
        chunk_min = float(values.min())
        tol = 1e-9 * max(1.0, abs(chunk_min))
        if chunk_min < best_value - tol:
            best_value = chunk_min
            best_index = start + int(np.flatnonzero(values <= chunk_min + tol)[0])
        elif chunk_min < best_value:
            best_value = chunk_min

    if best_index < 0:
        return ExactResult(point=None, value=np.inf, feasible=False, n_candidates=0)
    x = index_to_bits(best_index, n)
    point = MboPoint(x=x, u=np.zeros(0))
    value = float(x @ p.Q @ x + p.a @ x + p.c_u)
    return ExactResult(point=point, value=value, feasible=True, n_candidates=count)
