"""
带启动费用的多族背包（MISK）模块

二进制变量 χ_k 表示启用第 k 族，连续变量 ξ_kt ∈ [0, 1] 表示装入物品的比例:
    min Σ S_k χ_k + Σ C_kt ξ_kt
    s.t. Σ D_kt ξ_kt ≤ P_cap
         ξ_kt ≤ χ_k
"""

from dataclasses import dataclass
from typing import Tuple

import numpy as np

from .problem import MboPoint, MboProblem
from ..data.instances import MiskInstance


@dataclass(frozen=True)
class MiskIndexMap:
    """
    MISK 变量下标映射（ξ 按族优先展开）

    Attributes:
        K: 族数
        T: 每族物品数
    """
    K: int
    T: int

    def xi(self, k: int, t: int) -> int:
        """ξ_kt 在连续变量中的下标"""
        if not (0 <= k < self.K and 0 <= t < self.T):
            raise IndexError(f'ξ({k}, {t}) 越界')
        return k * self.T + t

    def decode(self, pt: MboPoint) -> Tuple[np.ndarray, np.ndarray]:
        """
        解码候选点

        Returns:
            (χ: (K,), ξ: (K, T))
        """
        return np.asarray(pt.x, dtype=float), np.asarray(pt.u, dtype=float).reshape(self.K, self.T)


def misk_to_mbo(inst: MiskInstance) -> Tuple[MboProblem, MiskIndexMap]:
    """
    MISK 实例转混合二进制问题

    Args:
        inst: MISK 实例

    Returns:
        (问题, 下标映射)
    """
    K, T = inst.K, inst.T
    n_cont = K * T
    index = MiskIndexMap(K=K, T=T)

    # 第一行容量约束，其后每个 ξ_kt 一行 ξ_kt - χ_k ≤ 0
    L_z = np.zeros((1 + n_cont, K))
    L_u = np.zeros((1 + n_cont, n_cont))
    h_l = np.zeros(1 + n_cont)
    L_u[0] = inst.D.reshape(-1)
    h_l[0] = inst.P_cap
    for k in range(K):
        for t in range(T):
            row = 1 + index.xi(k, t)
            L_u[row, index.xi(k, t)] = 1.0
            L_z[row, k] = -1.0

    problem = MboProblem.build(
        Q=np.zeros((K, K)),
        a=inst.S,
        P_u=np.zeros((n_cont, n_cont)),
        r_u=inst.C.reshape(-1),
        L_z=L_z,
        L_u=L_u,
        h_l=h_l,
        u_lb=np.zeros(n_cont),
        u_ub=np.ones(n_cont),
    )
    return problem, index


def fractional_fill(inst: MiskInstance, chi: np.ndarray) -> Tuple[np.ndarray, float]:
    """
    固定启用的族后，按单位收益贪心装入物品（分数背包的精确解）

    Args:
        inst: MISK 实例
        chi: (K,) 0/1 启用向量

    Returns:
        (ξ: (K, T), 目标值)
    """
    chi = np.asarray(chi, dtype=float)
    xi = np.zeros((inst.K, inst.T))
    value = float(inst.S @ chi)
    candidates = (chi[:, None] > 0.5) & (inst.C < 0)
    if not candidates.any():
        return xi, value
    ks, ts = np.nonzero(candidates)
    ratio = inst.C[ks, ts] / inst.D[ks, ts]
    order = np.lexsort((ts, ks, ratio))
    remaining = inst.P_cap
    for pos in order:
        k, t = ks[pos], ts[pos]
        if remaining <= 0:
            break
        take = min(1.0, remaining / inst.D[k, t])
        xi[k, t] = take
        remaining -= take * inst.D[k, t]
        value += take * inst.C[k, t]
    return xi, value


def solve_misk_exact(inst: MiskInstance) -> Tuple[MboPoint, float]:
    """
    MISK 精确解：枚举启用的族，每个组合用分数背包贪心求连续部分

    Args:
        inst: MISK 实例

    Returns:
        (最优点, 最优值)；平局时取枚举序（χ 字典序）最小者
    """
    best_value = np.inf
    best_chi = np.zeros(inst.K)
    best_xi = np.zeros((inst.K, inst.T))
    for code in range(1 << inst.K):
        chi = np.array([(code >> (inst.K - 1 - k)) & 1 for k in range(inst.K)], dtype=float)
        xi, value = fractional_fill(inst, chi)
        if value < best_value - 1e-12 * max(1.0, abs(value)):
            best_value, best_chi, best_xi = value, chi, xi
    return MboPoint(x=best_chi, u=best_xi.reshape(-1)), float(best_value)
