"""
子问题构造模块

由问题与当前迭代构造 ADMM 每轮的子问题:
    第一块: QUBO（二进制 x）
    第二块: 凸二次规划（连续副本 z 与连续变量 u）
    第三块: 松弛变量 y 的闭式更新
以及对偶变量更新。两块算法等价于 y ≡ 0 的特例。
"""

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import DimensionError
from .problem import MboProblem, PSD_TOL, is_psd


@dataclass(frozen=True, eq=False)
class QuboInstance:
    """
    QUBO 实例

    比特串 s 的能量为 sᵀQm s + linᵀs + off

    Attributes:
        Qm: 对称二次项矩阵
        lin: 一次项
        off: 常数偏移
    """
    Qm: np.ndarray
    lin: np.ndarray
    off: float = 0.0

    def __post_init__(self):
        """验证数据"""
        Qm = np.array(self.Qm, dtype=float)
        lin = np.array(self.lin, dtype=float).reshape(-1)
        n = lin.shape[0]
        if n < 1:
            raise DimensionError('QUBO 至少需要 1 个变量')
        if Qm.shape != (n, n):
            raise DimensionError(f'Qm 维度应为 {(n, n)}，实际为 {Qm.shape}')
        if not np.array_equal(Qm, Qm.T):
            raise ValueError('Qm 必须严格对称')
        Qm.setflags(write=False)
        lin.setflags(write=False)
        object.__setattr__(self, 'Qm', Qm)
        object.__setattr__(self, 'lin', lin)
        object.__setattr__(self, 'off', float(self.off))

    @property
    def n(self) -> int:
        """变量个数"""
        return self.lin.shape[0]

    def energy(self, s: np.ndarray) -> float:
        """单个比特串的能量"""
        s = np.asarray(s, dtype=float)
        if s.shape != (self.n,):
            raise DimensionError(f'比特串长度应为 {self.n}，实际为 {s.shape}')
        return float(s @ self.Qm @ s + self.lin @ s + self.off)

    def energies(self, states: np.ndarray) -> np.ndarray:
        """
        批量计算能量

        Args:
            states: (batch, n) 的 0/1 矩阵

        Returns:
            (batch,) 能量向量
        """
        states = np.asarray(states, dtype=float)
        return np.einsum('bi,bi->b', states @ self.Qm, states) + states @ self.lin + self.off


@dataclass(frozen=True, eq=False)
class QpInstance:
    """
    凸二次规划实例

    min ½vᵀPv + qᵀv + const
    s.t. A_in v ≤ b_in, lb ≤ v ≤ ub

    Attributes:
        P: 对称半正定矩阵
        q: 一次项
        A_in, b_in: 不等式约束
        lb, ub: 变量上下界（可为 ±inf）
        const: 目标常数（不影响最优解）
        psd_certified: 构造方已保证 P 半正定时跳过特征值检查
    """
    P: np.ndarray
    q: np.ndarray
    A_in: Optional[np.ndarray] = None
    b_in: Optional[np.ndarray] = None
    lb: Optional[np.ndarray] = None
    ub: Optional[np.ndarray] = None
    const: float = 0.0
    psd_certified: bool = False

    def __post_init__(self):
        """验证数据"""
        q = np.array(self.q, dtype=float).reshape(-1)
        m = q.shape[0]
        P = np.array(self.P, dtype=float)
        if P.shape != (m, m):
            raise DimensionError(f'P 维度应为 {(m, m)}，实际为 {P.shape}')
        b_in = np.zeros(0) if self.b_in is None else np.array(self.b_in, dtype=float).reshape(-1)
        A_in = np.zeros((0, m)) if self.A_in is None else np.array(self.A_in, dtype=float)
        if A_in.size == 0:
            A_in = A_in.reshape(b_in.shape[0], m)
        if A_in.shape != (b_in.shape[0], m):
            raise DimensionError(f'A_in 维度应为 {(b_in.shape[0], m)}，实际为 {A_in.shape}')
        lb = np.full(m, -np.inf) if self.lb is None else np.array(self.lb, dtype=float).reshape(-1)
        ub = np.full(m, np.inf) if self.ub is None else np.array(self.ub, dtype=float).reshape(-1)
        if lb.shape != (m,) or ub.shape != (m,):
            raise DimensionError('lb / ub 长度必须与变量个数一致')
        if np.any(lb > ub):
            raise ValueError('存在 lb > ub 的分量')

        if not self.psd_certified:
            scale = max(1.0, float(np.max(np.abs(P)))) if P.size else 1.0
            if not np.allclose(P, P.T, rtol=0.0, atol=PSD_TOL * scale):
                raise ValueError('P 必须对称')
            if not is_psd(P):
                raise ValueError('P 必须半正定')

        for name, value in (('P', P), ('q', q), ('A_in', A_in), ('b_in', b_in), ('lb', lb), ('ub', ub)):
            value.setflags(write=False)
            object.__setattr__(self, name, value)
        object.__setattr__(self, 'const', float(self.const))

    @property
    def n_var(self) -> int:
        """变量个数"""
        return self.q.shape[0]

    @property
    def n_ineq(self) -> int:
        """不等式约束个数"""
        return self.b_in.shape[0]

    def objective(self, v: np.ndarray) -> float:
        """目标值（含常数）"""
        v = np.asarray(v, dtype=float)
        return float(0.5 * v @ self.P @ v + self.q @ v + self.const)


def _vector(value, n: int, name: str) -> np.ndarray:
    arr = np.asarray(value, dtype=float).reshape(-1)
    if arr.shape[0] != n:
        raise DimensionError(f'{name} 长度应为 {n}，实际为 {arr.shape[0]}')
    return arr


def build_qubo(
    p: MboProblem,
    z: np.ndarray,
    y: np.ndarray,
    lam: np.ndarray,
    rho: float,
    c: float
) -> QuboInstance:
    """
    构造第一块（二进制）子问题

    Qm = Q + (c/2)G_eqᵀG_eq + (ρ/2)I
    lin = a + λ - c·G_eqᵀb_eq - ρ(z + y)
    off = (c/2)‖b_eq‖² + (ρ/2)‖z + y‖²

    Args:
        p: 问题
        z: 连续副本
        y: 松弛变量（两块算法传 0）
        lam: 对偶变量
        rho: 罚参数，必须 > 0
        c: 等式约束罚系数，必须 ≥ 0

    Returns:
        QUBO 实例
    """
    if not rho > 0:
        raise ValueError(f'rho 必须为正: {rho}')
    if c < 0:
        raise ValueError(f'c 不能为负: {c}')
    n = p.n_bin
    z = _vector(z, n, 'z')
    y = _vector(y, n, 'y')
    lam = _vector(lam, n, 'lambda')

    shift = z + y
    Qm = np.array(p.Q, dtype=float)
    lin = p.a + lam - rho * shift
    off = 0.5 * rho * float(shift @ shift)
    if p.has_equalities:
        Qm = Qm + 0.5 * c * (p.G_eq.T @ p.G_eq)
        lin = lin - c * (p.G_eq.T @ p.b_eq)
        off += 0.5 * c * float(p.b_eq @ p.b_eq)
    Qm[np.diag_indices(n)] += 0.5 * rho
    # 浮点运算后强制精确对称
    Qm = 0.5 * (Qm + Qm.T)
    return QuboInstance(Qm=Qm, lin=lin, off=off)


def build_qp(
    p: MboProblem,
    x: np.ndarray,
    y: np.ndarray,
    lam: np.ndarray,
    rho: float
) -> QpInstance:
    """
    构造第二块（凸）子问题

    变量 v = [z; u]，目标 φ(u) - λᵀz + (ρ/2)‖x - z - y‖² 展开为
    P = blockdiag(ρI, P_u)，q = [-λ - ρ(x - y); r_u]，const = c_u + (ρ/2)‖x - y‖²。
    约束 G_in z ≤ h_in，L_z z + L_u u ≤ h_l，u_lb ≤ u ≤ u_ub，z 无界。

    Args:
        p: 问题
        x: 当前二进制迭代
        y: 松弛变量（两块算法传 0）
        lam: 对偶变量
        rho: 罚参数，必须 > 0

    Returns:
        QP 实例
    """
    if not rho > 0:
        raise ValueError(f'rho 必须为正: {rho}')
    n, l = p.n_bin, p.n_cont
    x = _vector(x, n, 'x')
    y = _vector(y, n, 'y')
    lam = _vector(lam, n, 'lambda')
    m = n + l

    P = np.zeros((m, m))
    P[np.diag_indices(n)] = rho
    if l:
        P[n:, n:] = p.P_u
    target = x - y
    q = np.concatenate([-lam - rho * target, p.r_u])
    const = p.c_u + 0.5 * rho * float(target @ target)

    rows = []
    bounds = []
    if p.h_in.size:
        rows.append(np.hstack([p.G_in, np.zeros((p.h_in.shape[0], l))]))
        bounds.append(p.h_in)
    if p.h_l.size:
        rows.append(np.hstack([p.L_z, p.L_u]))
        bounds.append(p.h_l)
    A_in = np.vstack(rows) if rows else np.zeros((0, m))
    b_in = np.concatenate(bounds) if bounds else np.zeros(0)

    lb = np.concatenate([np.full(n, -np.inf), p.u_lb])
    ub = np.concatenate([np.full(n, np.inf), p.u_ub])
    # P_u 已在问题构造时验证
    return QpInstance(P=P, q=q, A_in=A_in, b_in=b_in, lb=lb, ub=ub, const=const, psd_certified=True)


def update_y(
    x: np.ndarray,
    z: np.ndarray,
    lam: np.ndarray,
    rho: float,
    beta: float
) -> np.ndarray:
    """
    第三块闭式更新

    y = (λ + ρ(x - z)) / (β + ρ)，即 (β/2)‖y‖² - λᵀy + (ρ/2)‖x - z - y‖² 的最小点

    Args:
        x: 二进制迭代
        z: 连续副本
        lam: 对偶变量
        rho: 罚参数，必须 > 0
        beta: y 的二次罚系数，必须 > 0

    Returns:
        新的 y
    """
    if not rho > 0:
        raise ValueError(f'rho 必须为正: {rho}')
    if not beta > 0:
        raise ValueError(f'beta 必须为正: {beta}')
    x = np.asarray(x, dtype=float)
    n = x.shape[0]
    z = _vector(z, n, 'z')
    lam = _vector(lam, n, 'lambda')
    return (lam + rho * (x - z)) / (beta + rho)


def update_dual(
    lam: np.ndarray,
    x: np.ndarray,
    z: np.ndarray,
    y: np.ndarray,
    rho: float
) -> np.ndarray:
    """
    对偶变量更新 λ' = λ + ρ(x - z - y)

    Args:
        lam: 当前对偶变量
        x, z, y: 当前迭代（两块算法 y = 0）
        rho: 罚参数，必须 > 0

    Returns:
        新的 λ
    """
    if not rho > 0:
        raise ValueError(f'rho 必须为正: {rho}')
    lam = np.asarray(lam, dtype=float)
    n = lam.shape[0]
    x = _vector(x, n, 'x')
    z = _vector(z, n, 'z')
    y = _vector(y, n, 'y')
    return lam + rho * (x - z - y)


def build_restricted_qp(p: MboProblem, x: np.ndarray) -> QpInstance:
    """
    固定二进制部分后的连续子问题

    min φ(u)  s.t. L_u u ≤ h_l - L_z x，u_lb ≤ u ≤ u_ub；
    常数项包含 xᵀQx + aᵀx + c_u，因此最优目标值即原问题目标值

    Args:
        p: 问题（n_cont ≥ 1）
        x: 二进制向量

    Returns:
        QP 实例
    """
    if p.n_cont == 0:
        raise DimensionError('问题没有连续变量')
    x = _vector(x, p.n_bin, 'x')
    binary_cost = float(x @ p.Q @ x + p.a @ x)
    return QpInstance(
        P=p.P_u,
        q=p.r_u,
        A_in=p.L_u,
        b_in=p.h_l - p.L_z @ x,
        lb=p.u_lb,
        ub=p.u_ub,
        const=binary_cost + p.c_u,
        psd_certified=True,
    )
