"""
随机实例生成器

BP: 重量在 [1, cap] 上均匀取整数，箱子数 m = n
MISK: 消耗 D 在 [1, 10] 上均匀取整数，容量按利用率 2.5 设定；
      分组 1 价值与消耗中度相关、启动费用较高，分组 2 价值与消耗无关、启动费用接近 0
"""

from typing import Optional

import numpy as np

from .instances import BpInstance, MiskInstance, bp_instance_id, misk_instance_id


# MISK 容量利用率 ΣD / P_cap
MISK_UTILIZATION = 2.5
# MISK 每族默认物品数
MISK_DEFAULT_T = 10


def gen_bp(n: int, cap: int, seed: int, idx: Optional[int] = None) -> BpInstance:
    """
    生成 BP 实例

    Args:
        n: 物品个数（箱子个数同为 n）
        cap: 容量
        seed: 随机种子
        idx: 实例序号，给出时用于生成实例标识

    Returns:
        BP 实例
    """
    if n < 1:
        raise ValueError(f'物品个数必须 ≥ 1: {n}')
    if cap < 1:
        raise ValueError(f'容量必须 ≥ 1: {cap}')
    rng = np.random.default_rng(seed)
    weights = rng.integers(1, cap + 1, size=n)
    name = bp_instance_id(n, cap, idx) if idx is not None else ''
    return BpInstance(n=n, m=n, cap=cap, w=tuple(int(v) for v in weights), name=name)


def gen_misk(
    K: int,
    T: int = MISK_DEFAULT_T,
    group: int = 1,
    seed: int = 0,
    idx: Optional[int] = None,
    round_capacity: bool = False
) -> MiskInstance:
    """
    生成 MISK 实例

    先抽取 D，再抽取 C，最后抽取 S，因此同一种子下两组的 D 与 P_cap 相同

    Args:
        K: 族数
        T: 每族物品数
        group: 分组（1 或 2）
        seed: 随机种子
        idx: 实例序号，给出时用于生成实例标识
        round_capacity: 是否把容量取整（不小于 1）

    Returns:
        MISK 实例
    """
    if K < 1 or T < 1:
        raise ValueError(f'K 与 T 必须 ≥ 1: K={K}, T={T}')
    if group not in (1, 2):
        raise ValueError(f'分组只能是 1 或 2: {group}')

    rng = np.random.default_rng(seed)
    D = rng.integers(1, 11, size=(K, T)).astype(float)
    if group == 1:
        C = -rng.uniform(D - 2.0, D + 2.0)
        S = rng.uniform(40.0, 60.0, size=K)
    else:
        C = rng.uniform(-60.0, -40.0, size=(K, T))
        S = rng.uniform(0.0, 1.0, size=K)

    capacity = float(D.sum()) / MISK_UTILIZATION
    if round_capacity:
        capacity = float(max(1, round(capacity)))
    name = misk_instance_id(K, T, group, idx) if idx is not None else ''
    return MiskInstance(K=K, T=T, P_cap=capacity, S=S, C=C, D=D, name=name, group=group)
