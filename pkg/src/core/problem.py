"""
混合二进制问题模块

定义混合二进制二次规划问题类，并计算目标值、约束违反量、评价值（merit）、
可行性与 ADMM 残差

问题形式:
    min  xᵀQx + aᵀx + φ(u),   φ(u) = ½uᵀP_u u + r_uᵀu + c_u
    s.t. G_eq x = b_eq
         G_in x - h_in ≤ 0
         L_z x + L_u u - h_l ≤ 0
         u_lb ≤ u ≤ u_ub,  x ∈ {0,1}ⁿ
"""

import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Dict, Optional, Sequence, Tuple

import numpy as np

from .errors import DimensionError


# 对称半正定检查的相对容差
PSD_TOL = 1e-9
# 默认可行性容差
FEASIBILITY_TOL = 1e-6


class AdmmMode(str, Enum):
    """ADMM 分块方式"""
    TWO_BLOCK = 'two_block'
    THREE_BLOCK = 'three_block'

    @classmethod
    def from_blocks(cls, blocks: int) -> 'AdmmMode':
        """由块数 (2 或 3) 得到模式"""
        if blocks == 2:
            return cls.TWO_BLOCK
        if blocks == 3:
            return cls.THREE_BLOCK
        raise ValueError(f'块数只能是 2 或 3: {blocks}')


def _frozen_array(value: Any, shape: Tuple[int, ...], name: str) -> np.ndarray:
    """转换为只读 float64 数组并检查形状"""
    arr = np.array(value, dtype=float)
    if arr.size == 0:
        arr = arr.reshape(shape)
    if arr.shape != shape:
        raise DimensionError(f'{name} 维度应为 {shape}，实际为 {arr.shape}')
    arr.setflags(write=False)
    return arr


def is_psd(matrix: np.ndarray, rel_tol: float = PSD_TOL) -> bool:
    """
    判断对称矩阵是否半正定

    最小特征值 ≥ -rel_tol·‖M‖₂ 视为半正定

    Args:
        matrix: 方阵
        rel_tol: 相对容差

    Returns:
        是否半正定
    """
    if matrix.size == 0:
        return True
    sym = 0.5 * (matrix + matrix.T)
    eigvals = np.linalg.eigvalsh(sym)
    scale = float(np.max(np.abs(eigvals)))
    return bool(eigvals[0] >= -rel_tol * scale)


@dataclass(frozen=True, eq=False)
class MboProblem:
    """
    混合二进制优化问题

    构造后不可变（所有数组只读）。推荐使用 build() 构造，缺省块自动补零。

    Attributes:
        n_bin: 二进制变量个数
        n_cont: 连续变量个数（可为 0）
        Q, a: 二进制二次项与一次项
        P_u, r_u, c_u: 连续部分 φ(u) = ½uᵀP_u u + r_uᵀu + c_u
        G_eq, b_eq: 等式约束 G_eq x = b_eq
        G_in, h_in: 二进制不等式 G_in x ≤ h_in
        L_z, L_u, h_l: 联合不等式 L_z z + L_u u ≤ h_l
        u_lb, u_ub: 连续变量上下界（可为 ±inf）
    """
    n_bin: int
    n_cont: int
    Q: np.ndarray
    a: np.ndarray
    P_u: np.ndarray
    r_u: np.ndarray
    c_u: float
    G_eq: np.ndarray
    b_eq: np.ndarray
    G_in: np.ndarray
    h_in: np.ndarray
    L_z: np.ndarray
    L_u: np.ndarray
    h_l: np.ndarray
    u_lb: np.ndarray
    u_ub: np.ndarray

    def __post_init__(self):
        """验证数据"""
        n, l = int(self.n_bin), int(self.n_cont)
        if n < 1:
            raise DimensionError(f'二进制变量个数必须 ≥ 1: {n}')
        if l < 0:
            raise DimensionError(f'连续变量个数不能为负: {l}')

        def fix(name: str, shape: Tuple[int, ...]):
            object.__setattr__(self, name, _frozen_array(getattr(self, name), shape, name))

        fix('Q', (n, n))
        fix('a', (n,))
        fix('P_u', (l, l))
        fix('r_u', (l,))
        object.__setattr__(self, 'c_u', float(self.c_u))

        n_eq = np.asarray(self.b_eq, dtype=float).reshape(-1).shape[0]
        fix('G_eq', (n_eq, n))
        fix('b_eq', (n_eq,))
        n_gin = np.asarray(self.h_in, dtype=float).reshape(-1).shape[0]
        fix('G_in', (n_gin, n))
        fix('h_in', (n_gin,))
        n_l = np.asarray(self.h_l, dtype=float).reshape(-1).shape[0]
        fix('L_z', (n_l, n))
        fix('L_u', (n_l, l))
        fix('h_l', (n_l,))
        fix('u_lb', (l,))
        fix('u_ub', (l,))

        if not np.array_equal(self.Q, self.Q.T):
            raise ValueError('Q 必须严格对称')
        if l > 0:
            scale = max(1.0, float(np.max(np.abs(self.P_u))))
            if not np.allclose(self.P_u, self.P_u.T, rtol=0.0, atol=PSD_TOL * scale):
                raise ValueError('P_u 必须对称')
            if not is_psd(self.P_u):
                raise ValueError('P_u 必须半正定')
        both = np.isfinite(self.u_lb) & np.isfinite(self.u_ub)
        if np.any(self.u_lb[both] > self.u_ub[both]):
            raise ValueError('存在 u_lb > u_ub 的分量')

    @classmethod
    def build(
        cls,
        Q: Any,
        a: Any,
        *,
        P_u: Any = None,
        r_u: Any = None,
        c_u: float = 0.0,
        G_eq: Any = None,
        b_eq: Any = None,
        G_in: Any = None,
        h_in: Any = None,
        L_z: Any = None,
        L_u: Any = None,
        h_l: Any = None,
        u_lb: Any = None,
        u_ub: Any = None,
        n_cont: Optional[int] = None
    ) -> 'MboProblem':
        """
        构造问题，未给出的块补为空/零

        Args:
            Q, a: 二进制目标
            其余参数: 见类说明；n_cont 未给出时由 r_u / P_u / u_lb / u_ub / L_u 推断

        Returns:
            问题实例
        """
        a = np.asarray(a, dtype=float).reshape(-1)
        n = a.shape[0]
        if n_cont is None:
            n_cont = 0
            for candidate in (r_u, u_lb, u_ub):
                if candidate is not None:
                    n_cont = np.asarray(candidate).reshape(-1).shape[0]
                    break
            else:
                if P_u is not None:
                    n_cont = np.asarray(P_u).shape[0]
                elif L_u is not None:
                    n_cont = np.asarray(L_u).shape[1]
        l = n_cont

        def rows_of(vector: Any) -> int:
            return 0 if vector is None else np.asarray(vector, dtype=float).reshape(-1).shape[0]

        n_eq, n_gin, n_l = rows_of(b_eq), rows_of(h_in), rows_of(h_l)
        return cls(
            n_bin=n,
            n_cont=l,
            Q=np.zeros((n, n)) if Q is None else Q,
            a=a,
            P_u=np.zeros((l, l)) if P_u is None else P_u,
            r_u=np.zeros(l) if r_u is None else r_u,
            c_u=c_u,
            G_eq=np.zeros((n_eq, n)) if G_eq is None else G_eq,
            b_eq=np.zeros(0) if b_eq is None else b_eq,
            G_in=np.zeros((n_gin, n)) if G_in is None else G_in,
            h_in=np.zeros(0) if h_in is None else h_in,
            L_z=np.zeros((n_l, n)) if L_z is None else L_z,
            L_u=np.zeros((n_l, l)) if L_u is None else L_u,
            h_l=np.zeros(0) if h_l is None else h_l,
            u_lb=np.full(l, -np.inf) if u_lb is None else u_lb,
            u_ub=np.full(l, np.inf) if u_ub is None else u_ub,
        )

    @property
    def n_eq(self) -> int:
        """等式约束个数"""
        return self.b_eq.shape[0]

    @property
    def has_equalities(self) -> bool:
        """是否存在等式约束"""
        return self.n_eq > 0

    def to_dict(self) -> Dict[str, Any]:
        """导出为 JSON 友好的字典（无穷大编码为 "inf"/"-inf"）"""
        return {
            'type': 'mbo',
            'n_bin': self.n_bin,
            'n_cont': self.n_cont,
            'Q': _encode(self.Q),
            'a': _encode(self.a),
            'P_u': _encode(self.P_u),
            'r_u': _encode(self.r_u),
            'c_u': _encode_scalar(self.c_u),
            'G_eq': _encode(self.G_eq),
            'b_eq': _encode(self.b_eq),
            'G_in': _encode(self.G_in),
            'h_in': _encode(self.h_in),
            'L_z': _encode(self.L_z),
            'L_u': _encode(self.L_u),
            'h_l': _encode(self.h_l),
            'u_lb': _encode(self.u_lb),
            'u_ub': _encode(self.u_ub),
        }

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> 'MboProblem':
        """
        从字典构造问题

        Args:
            data: to_dict() 格式的字典，缺省键按空块处理

        Returns:
            问题实例
        """
        required = ('n_bin', 'Q', 'a')
        missing = [key for key in required if key not in data]
        if missing:
            raise ValueError(f'实例缺少字段: {missing}')

        n = int(data['n_bin'])
        l = int(data.get('n_cont', 0))

        def matrix(key: str, cols: int) -> np.ndarray:
            value = _decode(data.get(key, []))
            return value.reshape(-1, cols) if value.size else np.zeros((0, cols))

        return cls(
            n_bin=n,
            n_cont=l,
            Q=matrix('Q', n),
            a=_decode(data['a']),
            P_u=matrix('P_u', l),
            r_u=_decode(data.get('r_u', [])),
            c_u=float(_decode_scalar(data.get('c_u', 0.0))),
            G_eq=matrix('G_eq', n),
            b_eq=_decode(data.get('b_eq', [])),
            G_in=matrix('G_in', n),
            h_in=_decode(data.get('h_in', [])),
            L_z=matrix('L_z', n),
            L_u=matrix('L_u', l),
            h_l=_decode(data.get('h_l', [])),
            u_lb=_decode(data.get('u_lb', [-math.inf] * l)),
            u_ub=_decode(data.get('u_ub', [math.inf] * l)),
        )


@dataclass(frozen=True, eq=False)
class MboPoint:
    """
    问题的一个候选点

    Attributes:
        x: 二进制向量（取值 0/1）
        u: 连续向量
    """
    x: np.ndarray
    u: np.ndarray = field(default_factory=lambda: np.zeros(0))

    def __post_init__(self):
        """验证数据"""
        x = np.array(self.x, dtype=float).reshape(-1)
        u = np.array(self.u, dtype=float).reshape(-1)
        if not np.all((x == 0.0) | (x == 1.0)):
            raise ValueError(f'x 的分量必须为 0 或 1: {x}')
        x.setflags(write=False)
        u.setflags(write=False)
        object.__setattr__(self, 'x', x)
        object.__setattr__(self, 'u', u)

    def to_dict(self) -> Dict[str, Any]:
        """导出为字典"""
        return {'x': [int(v) for v in self.x], 'u': [float(v) for v in self.u]}


def _encode_scalar(value: float) -> Any:
    if math.isinf(value):
        return 'inf' if value > 0 else '-inf'
    return float(value)


def _encode(arr: np.ndarray) -> Any:
    if arr.ndim == 1:
        return [_encode_scalar(float(v)) for v in arr]
    return [[_encode_scalar(float(v)) for v in row] for row in arr]


def _decode_scalar(value: Any) -> float:
    if isinstance(value, str):
        token = value.strip().lower()
        if token in ('inf', '+inf', 'infinity'):
            return math.inf
        if token in ('-inf', '-infinity'):
            return -math.inf
        raise ValueError(f'无法解析数值: {value!r}')
    return float(value)


def _decode(value: Any) -> np.ndarray:
    arr = np.array(value, dtype=object)
    if arr.size == 0:
        return np.zeros(arr.shape if arr.ndim > 1 else 0)
    flat = np.array([_decode_scalar(v) for v in arr.reshape(-1)], dtype=float)
    return flat.reshape(arr.shape)


def _check_point(p: MboProblem, pt: MboPoint):
    if pt.x.shape[0] != p.n_bin:
        raise DimensionError(f'x 长度 {pt.x.shape[0]} 与 n_bin={p.n_bin} 不一致')
    if pt.u.shape[0] != p.n_cont:
        raise DimensionError(f'u 长度 {pt.u.shape[0]} 与 n_cont={p.n_cont} 不一致')


def continuous_cost(p: MboProblem, u: np.ndarray) -> float:
    """φ(u) = ½uᵀP_u u + r_uᵀu + c_u"""
    return float(0.5 * u @ p.P_u @ u + p.r_u @ u + p.c_u)


def objective(p: MboProblem, pt: MboPoint) -> float:
    """
    原问题目标值 xᵀQx + aᵀx + φ(u)

    Args:
        p: 问题
        pt: 候选点

    Returns:
        目标值
    """
    _check_point(p, pt)
    x = pt.x
    return float(x @ p.Q @ x + p.a @ x) + continuous_cost(p, pt.u)


def inequality_violation(p: MboProblem, pt: MboPoint) -> float:
    """
    不等式约束违反量

    Σ max(G_in x - h_in, 0) + Σ max(L_z x + L_u u - h_l, 0)，联合约束中 z 以二进制 x 代入
    """
    _check_point(p, pt)
    total = 0.0
    if p.h_in.size:
        total += float(np.sum(np.maximum(p.G_in @ pt.x - p.h_in, 0.0)))
    if p.h_l.size:
        total += float(np.sum(np.maximum(p.L_z @ pt.x + p.L_u @ pt.u - p.h_l, 0.0)))
    return total


def violation(p: MboProblem, pt: MboPoint) -> float:
    """约束违反量（不含等式约束）"""
    return inequality_violation(p, pt)


def equality_violation(p: MboProblem, pt: MboPoint) -> float:
    """等式约束违反量 ‖G_eq x - b_eq‖₁"""
    _check_point(p, pt)
    if not p.has_equalities:
        return 0.0
    return float(np.sum(np.abs(p.G_eq @ pt.x - p.b_eq)))


def merit(p: MboProblem, pt: MboPoint, mu: float, include_equalities: bool = False) -> float:
    """
    评价值 objective + μ·violation

    Args:
        p: 问题
        pt: 候选点
        mu: 违反量惩罚系数，必须 > 0
        include_equalities: 是否把 ‖G_eq x - b_eq‖₁ 也计入违反量

    Returns:
        评价值
    """
    if not mu > 0:
        raise ValueError(f'mu 必须为正: {mu}')
    penalty = violation(p, pt)
    if include_equalities:
        penalty += equality_violation(p, pt)
    return objective(p, pt) + mu * penalty


def is_feasible(p: MboProblem, pt: MboPoint, tol: float = FEASIBILITY_TOL) -> bool:
    """
    判断候选点是否满足原问题全部约束

    Args:
        p: 问题
        pt: 候选点
        tol: 绝对容差

    Returns:
        是否可行
    """
    if tol < 0:
        raise ValueError(f'tol 不能为负: {tol}')
    _check_point(p, pt)
    if p.has_equalities and np.max(np.abs(p.G_eq @ pt.x - p.b_eq)) > tol:
        return False
    if p.h_in.size and np.max(p.G_in @ pt.x - p.h_in) > tol:
        return False
    if p.h_l.size and np.max(p.L_z @ pt.x + p.L_u @ pt.u - p.h_l) > tol:
        return False
    if p.n_cont:
        if np.any(pt.u < p.u_lb - tol) or np.any(pt.u > p.u_ub + tol):
            return False
    return True


def residuals(
    x: Sequence[float],
    z: Sequence[float],
    y: Optional[Sequence[float]],
    mode: AdmmMode
) -> Tuple[float, float]:
    """
    ADMM 残差

    三块: r = ‖x - z - y‖₂，rr = ‖x - z‖₂；两块: r = rr = ‖x - z‖₂

    Args:
        x: 二进制迭代
        z: 连续副本
        y: 松弛变量（两块模式可为 None）
        mode: 分块方式

    Returns:
        (r, rr)
    """
    x = np.asarray(x, dtype=float)
    z = np.asarray(z, dtype=float)
    if x.shape != z.shape:
        raise DimensionError(f'x 与 z 维度不一致: {x.shape} vs {z.shape}')
    diff = x - z
    rr = float(np.linalg.norm(diff))
    if AdmmMode(mode) is AdmmMode.TWO_BLOCK:
        return rr, rr
    y = np.zeros_like(x) if y is None else np.asarray(y, dtype=float)
    if y.shape != x.shape:
        raise DimensionError(f'y 与 x 维度不一致: {y.shape} vs {x.shape}')
    return float(np.linalg.norm(diff - y)), rr
