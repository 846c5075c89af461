"""
基准实例数据结构

装箱（BP）与带启动费用的多族背包（MISK）实例，以及 JSON 读写
"""

import json
import math
import os
from dataclasses import dataclass
from typing import Any, Dict, Union

import numpy as np

from ..core.errors import InstanceError


@dataclass(frozen=True)
class BpInstance:
    """
    装箱实例

    Attributes:
        n: 物品个数
        m: 箱子个数
        cap: 箱子容量
        w: 物品重量（整数）
        name: 实例标识
    """
    n: int
    m: int
    cap: int
    w: tuple
    name: str = ''

    def __post_init__(self):
        """验证数据"""
        weights = tuple(int(v) for v in self.w)
        object.__setattr__(self, 'w', weights)
        if self.n < 1 or len(weights) != self.n:
            raise ValueError(f'物品个数 n={self.n} 与重量个数 {len(weights)} 不一致')
        if self.m < 1:
            raise ValueError(f'箱子个数必须 ≥ 1: {self.m}')
        if self.cap < 1:
            raise ValueError(f'容量必须 ≥ 1: {self.cap}')
        if min(weights) < 1:
            raise ValueError('物品重量必须 ≥ 1')

    @property
    def weights(self) -> np.ndarray:
        """重量向量"""
        return np.array(self.w, dtype=float)

    @property
    def lower_bound(self) -> int:
        """箱子数下界 l = ⌈Σw / cap⌉"""
        return max(1, math.ceil(sum(self.w) / self.cap))

    @property
    def oversized_items(self) -> list:
        """重量超过容量的物品下标"""
        return [j for j, v in enumerate(self.w) if v > self.cap]

    def to_dict(self) -> Dict[str, Any]:
        return {'type': 'bp', 'name': self.name, 'n': self.n, 'm': self.m, 'cap': self.cap, 'w': list(self.w)}

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> 'BpInstance':
        weights = list(data['w'])
        return cls(
            n=int(data.get('n', len(weights))),
            m=int(data.get('m', len(weights))),
            cap=int(data['cap']),
            w=tuple(weights),
            name=str(data.get('name', '')),
        )


@dataclass(frozen=True, eq=False)
class MiskInstance:
    """
    带启动费用的多族背包实例

    Attributes:
        K: 族数
        T: 每族物品数
        P_cap: 背包容量
        S: 各族启动费用 (K,)
        C: 物品价值 (K, T)，负值表示收益
        D: 物品资源消耗 (K, T)
        name: 实例标识
        group: 生成分组（1 或 2，手工实例为 0）
    """
    K: int
    T: int
    P_cap: float
    S: np.ndarray
    C: np.ndarray
    D: np.ndarray
    name: str = ''
    group: int = 0

    def __post_init__(self):
        """验证数据"""
        S = np.array(self.S, dtype=float).reshape(-1)
        C = np.array(self.C, dtype=float)
        D = np.array(self.D, dtype=float)
        if self.K < 1 or self.T < 1:
            raise ValueError(f'K 与 T 必须 ≥ 1: K={self.K}, T={self.T}')
        if S.shape != (self.K,):
            raise ValueError(f'S 维度应为 {(self.K,)}，实际为 {S.shape}')
        if C.shape != (self.K, self.T) or D.shape != (self.K, self.T):
            raise ValueError(f'C / D 维度应为 {(self.K, self.T)}')
        if not self.P_cap > 0:
            raise ValueError(f'容量必须为正: {self.P_cap}')
        for name, value in (('S', S), ('C', C), ('D', D)):
            value.setflags(write=False)
            object.__setattr__(self, name, value)
        object.__setattr__(self, 'P_cap', float(self.P_cap))

    @property
    def utilization(self) -> float:
        """容量利用率 ΣD / P_cap"""
        return float(self.D.sum() / self.P_cap)

    def to_dict(self) -> Dict[str, Any]:
        return {
            'type': 'misk',
            'name': self.name,
            'group': self.group,
            'K': self.K,
            'T': self.T,
            'P_cap': self.P_cap,
            'S': self.S.tolist(),
            'C': self.C.tolist(),
            'D': self.D.tolist(),
            'utilization': self.utilization,
        }

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> 'MiskInstance':
        return cls(
            K=int(data['K']),
            T=int(data['T']),
            P_cap=float(data['P_cap']),
            S=np.array(data['S'], dtype=float),
            C=np.array(data['C'], dtype=float),
            D=np.array(data['D'], dtype=float),
            name=str(data.get('name', '')),
            group=int(data.get('group', 0)),
        )


Instance = Union[BpInstance, MiskInstance]
INSTANCE_TYPES = ('bp', 'misk')


def instance_from_dict(data: Dict[str, Any]) -> Instance:
    """
    按 type 字段构造实例

    Args:
        data: 实例字典

    Returns:
        BP 或 MISK 实例
    """
    kind = data.get('type')
    try:
        if kind == 'bp':
            return BpInstance.from_dict(data)
        if kind == 'misk':
            return MiskInstance.from_dict(data)
    except (KeyError, TypeError, ValueError) as e:
        raise InstanceError(f'实例字段错误: {e}') from e
    raise InstanceError(f'未知的实例类型: {kind!r}')


def dump_instance(inst: Instance, path: str) -> None:
    """
    保存实例为 JSON

    Args:
        inst: 实例
        path: 文件路径
    """
    directory = os.path.dirname(path)
    if directory:
        os.makedirs(directory, exist_ok=True)
    with open(path, 'w', encoding='utf-8') as f:
        json.dump(inst.to_dict(), f, indent=2, ensure_ascii=False)


def load_instance(path: str) -> Instance:
    """
    读取 JSON 实例

    Args:
        path: 文件路径

    Returns:
        BP 或 MISK 实例
    """
    try:
        with open(path, 'r', encoding='utf-8') as f:
            data = json.load(f)
    except (OSError, json.JSONDecodeError) as e:
        raise InstanceError(f'无法读取实例 {path}: {e}') from e
    return instance_from_dict(data)


def bp_instance_id(n: int, cap: int, idx: int) -> str:
    """BP 实例标识 N{n}C{cap}I{idx}"""
    return f'N{n}C{cap}I{idx}'


def misk_instance_id(K: int, T: int, group: int, idx: int) -> str:
    """MISK 实例标识 K{K}T{T}G{group}I{idx}"""
    return f'K{K}T{T}G{group}I{idx}'
