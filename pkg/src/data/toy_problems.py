"""
参考小问题

用于演示和回归测试的小规模混合二进制问题。
连续变量与二进制变量相等的约束 v = w 写成两行联合不等式 z - u ≤ 0、u - z ≤ 0，
使 w 作为连续变量 u 进入第二块。
"""

from typing import Callable, Dict

import numpy as np

from ..core.problem import MboProblem


def split_equality_problem() -> MboProblem:
    """min -2v + w²  s.t. v = w，v ∈ {0,1}，w ∈ ℝ"""
    return MboProblem.build(
        Q=np.zeros((1, 1)),
        a=[-2.0],
        P_u=[[2.0]],
        r_u=[0.0],
        L_z=[[1.0], [-1.0]],
        L_u=[[-1.0], [1.0]],
        h_l=[0.0, 0.0],
    )


def bounded_split_problem() -> MboProblem:
    """min -2v + w²  s.t. v = w，w ≥ 1/2"""
    return MboProblem.build(
        Q=np.zeros((1, 1)),
        a=[-2.0],
        P_u=[[2.0]],
        r_u=[0.0],
        L_z=[[1.0], [-1.0]],
        L_u=[[-1.0], [1.0]],
        h_l=[0.0, 0.0],
        u_lb=[0.5],
        u_ub=[np.inf],
    )


def two_bit_inequality_problem() -> MboProblem:
    """min v + w  s.t. 2v + w ≤ 2，v + w ≥ 1"""
    return MboProblem.build(
        Q=np.zeros((2, 2)),
        a=[1.0, 1.0],
        G_in=[[2.0, 1.0], [-1.0, -1.0]],
        h_in=[2.0, -1.0],
    )


def three_bit_inequality_problem(b: int = 1) -> MboProblem:
    """min v + w + t  s.t. 2v + 10w + t ≤ 3，v + w + t ≥ b"""
    return MboProblem.build(
        Q=np.zeros((3, 3)),
        a=[1.0, 1.0, 1.0],
        G_in=[[2.0, 10.0, 1.0], [-1.0, -1.0, -1.0]],
        h_in=[3.0, -float(b)],
    )


def equality_inequality_problem() -> MboProblem:
    """min v + w + t  s.t. 2v + 2w + t ≤ 3，v + w + t ≥ 1，v + w = 1"""
    return MboProblem.build(
        Q=np.zeros((3, 3)),
        a=[1.0, 1.0, 1.0],
        G_in=[[2.0, 2.0, 1.0], [-1.0, -1.0, -1.0]],
        h_in=[3.0, -1.0],
        G_eq=[[1.0, 1.0, 0.0]],
        b_eq=[1.0],
    )


def mixed_continuous_problem() -> MboProblem:
    """min v + w + t + 5(u - 2)²  s.t. v + 2w + t + u ≤ 3，v + w + t ≥ 1，v + w = 1"""
    return MboProblem.build(
        Q=np.zeros((3, 3)),
        a=[1.0, 1.0, 1.0],
        P_u=[[10.0]],
        r_u=[-20.0],
        c_u=20.0,
        G_in=[[-1.0, -1.0, -1.0]],
        h_in=[-1.0],
        G_eq=[[1.0, 1.0, 0.0]],
        b_eq=[1.0],
        L_z=[[1.0, 2.0, 1.0]],
        L_u=[[1.0]],
        h_l=[3.0],
    )


TOY_PROBLEMS: Dict[str, Callable[[], MboProblem]] = {
    'split-equality': split_equality_problem,
    'bounded-split': bounded_split_problem,
    'two-bit-inequality': two_bit_inequality_problem,
    'three-bit-inequality': three_bit_inequality_problem,
    'three-bit-inequality-b2': lambda: three_bit_inequality_problem(2),
    'equality-inequality': equality_inequality_problem,
    'mixed-continuous': mixed_continuous_problem,
}


def get_toy_problem(name: str) -> MboProblem:
    """
    按名称构造参考小问题

    Args:
        name: 名称，见 TOY_PROBLEMS

    Returns:
        问题实例
    """
    builder = TOY_PROBLEMS.get(name)
    if builder is None:
        raise KeyError(f'未知的问题: {name}，可用: {sorted(TOY_PROBLEMS)}')
    return builder()
