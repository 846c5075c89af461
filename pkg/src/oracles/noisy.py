"""
含噪预言机

包装任意预言机：对其返回的比特串逐位独立翻转，翻转概率随外层迭代衰减
p_k = min(0.5, p0 / k)，用来模拟不精确的 QUBO 求解。
"""

from dataclasses import dataclass
from typing import Any, Dict, Optional, Tuple

import numpy as np

from ..core.splitting import QuboInstance
from .base import BaseOracle, IQuboOracle


# 翻转概率上限
MAX_FLIP_PROBABILITY = 0.5


@dataclass(frozen=True)
class NoiseSchedule:
    """
    翻转概率衰减规律

    Attributes:
        p0: 初始翻转概率
    """
    p0: float = 0.5

    def __post_init__(self):
        """验证数据"""
        if not 0.0 <= self.p0:
            raise ValueError(f'p0 不能为负: {self.p0}')

    def probability(self, k: int) -> float:
        """第 k 次迭代的翻转概率"""
        if k < 1:
            raise ValueError(f'迭代序号必须 ≥ 1: {k}')
        return min(MAX_FLIP_PROBABILITY, self.p0 / k)


class NoisyOracle(BaseOracle):
    """
    含噪包装预言机
    """

    def __init__(self, base: IQuboOracle, schedule: Optional[NoiseSchedule] = None):
        """
        初始化

        Args:
            base: 被包装的预言机
            schedule: 翻转概率规律
        """
        super().__init__('noisy')
        self.base = base
        self.schedule = schedule or NoiseSchedule()

    def describe(self) -> Dict[str, Any]:
        return {'name': self.name, 'p0': self.schedule.p0, 'base': self.base.describe()}

    def _solve_impl(
        self,
        qubo: QuboInstance,
        k: int,
        seed: int
    ) -> Tuple[np.ndarray, Optional[float], Dict[str, Any]]:
        clean = self.base.solve(qubo, k, seed)
        probability = self.schedule.probability(k)
        rng = np.random.default_rng([int(seed) & 0xFFFFFFFFFFFFFFFF, int(k), 1])
        flips = rng.random(qubo.n) < probability
        bits = np.where(flips, 1 - clean.bits, clean.bits).astype(np.int8)
        metadata = {
            'flip_probability': probability,
            'flipped': int(flips.sum()),
            'base_energy': clean.energy,
        }
        # 能量由 BaseOracle 按翻转后的比特串重新计算
        return bits, None, metadata


def noisy_wrap(base: IQuboOracle, schedule: Optional[NoiseSchedule] = None) -> NoisyOracle:
    """
    用翻转噪声包装预言机

    Args:
        base: 被包装的预言机
        schedule: 翻转概率规律（默认 p0 = 0.5）

    Returns:
        含噪预言机
    """
    return NoisyOracle(base, schedule)
