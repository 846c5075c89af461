"""
装箱局部搜索预言机

包装任意预言机，对其返回的比特串执行基于 Karmarkar-Karp 差分的装箱局部搜索
"""

from typing import Any, Dict, Optional, Tuple

import numpy as np

from ..core.bin_packing import DEFAULT_MU, BpIndexMap, kk_local_search
from ..core.splitting import QuboInstance
from ..data.instances import BpInstance
from .base import BaseOracle, IQuboOracle


class LocalSearchOracle(BaseOracle):
    """
    局部搜索包装预言机

    只适用于由 bp_to_mbo 得到的问题：比特串按 BpIndexMap 解码为物品分配
    """

    def __init__(
        self,
        base: IQuboOracle,
        inst: BpInstance,
        index: Optional[BpIndexMap] = None,
        mu: float = DEFAULT_MU
    ):
        """
        初始化

        Args:
            base: 被包装的预言机
            inst: BP 实例
            index: 下标映射（缺省时按实例计算）
            mu: 违反量惩罚
        """
        super().__init__('local_search')
        self.base = base
        self.inst = inst
        self.index = index or BpIndexMap(n=inst.n, m=inst.m, l=inst.lower_bound)
        self.mu = mu

    def describe(self) -> Dict[str, Any]:
        return {'name': self.name, 'mu': self.mu, 'base': self.base.describe()}

    def _solve_impl(
        self,
        qubo: QuboInstance,
        k: int,
        seed: int
    ) -> Tuple[np.ndarray, Optional[float], Dict[str, Any]]:
        if qubo.n != self.index.n_bin:
            raise ValueError(f'QUBO 规模 {qubo.n} 与装箱变量数 {self.index.n_bin} 不一致')
        raw = self.base.solve(qubo, k, seed)
        improved = kk_local_search(self.inst, raw.bits, self.index, self.mu)
        metadata = {
            'base_energy': raw.energy,
            'changed': int(np.count_nonzero(improved != raw.bits)),
        }
        return improved, None, metadata
