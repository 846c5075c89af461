"""
精确枚举预言机

分块枚举全部 2ⁿ 个比特串。比特 0 为最高位，索引递增即字典序递增，
因此第一个达到最小能量的比特串就是字典序最小的最优解。
"""

from typing import Any, Dict, Iterator, Optional, Tuple

import numpy as np

from ..core.errors import SizeGuardError
from ..core.splitting import QuboInstance
from .base import BaseOracle


# 枚举规模上限
DEFAULT_MAX_BITS = 24
# 每块枚举的状态数
CHUNK_SIZE = 1 << 15
# 判定能量相同的相对容差
TIE_TOL = 1e-9


def iter_bit_chunks(n: int, chunk_size: int = CHUNK_SIZE) -> Iterator[Tuple[int, np.ndarray]]:
    """
    按字典序分块生成全部比特串

    Args:
        n: 比特数
        chunk_size: 每块状态数

    Yields:
        (块起始索引, (batch, n) 的 0/1 float 矩阵)
    """
    shifts = np.arange(n - 1, -1, -1, dtype=np.int64)
    total = 1 << n
    for start in range(0, total, chunk_size):
        idx = np.arange(start, min(start + chunk_size, total), dtype=np.int64)
        yield start, ((idx[:, None] >> shifts) & 1).astype(float)


def index_to_bits(index: int, n: int) -> np.ndarray:
    """枚举索引转比特串（比特 0 为最高位）"""
    shifts = np.arange(n - 1, -1, -1, dtype=np.int64)
    return ((np.int64(index) >> shifts) & 1).astype(np.int8)


def exact_solve(qubo: QuboInstance, max_bits: int = DEFAULT_MAX_BITS) -> Tuple[np.ndarray, float]:
    """
    枚举求 QUBO 全局最优

    Args:
        qubo: QUBO 实例
        max_bits: 规模上限

    Returns:
        (字典序最小的最优比特串, 能量)
    """
    n = qubo.n
    if n > max_bits:
        raise SizeGuardError(f'精确枚举只支持 n ≤ {max_bits}，当前 n={n}')

    best_energy = np.inf
    best_index = -1
    for start, states in iter_bit_chunks(n):
        energies = qubo.energies(states)
        chunk_min = float(energies.min())
        tol = TIE_TOL * max(1.0, abs(chunk_min))
        if chunk_min < best_energy - tol:
            best_energy = chunk_min
            best_index = start + int(np.flatnonzero(energies <= chunk_min + tol)[0])
        elif chunk_min < best_energy:
            best_energy = chunk_min

    bits = index_to_bits(best_index, n)
    return bits, qubo.energy(bits)


class ExactOracle(BaseOracle):
    """
    精确枚举预言机
    """

    def __init__(self, max_bits: int = DEFAULT_MAX_BITS):
        """
        初始化

        Args:
            max_bits: 规模上限
        """
        super().__init__('exact')
        if max_bits < 1:
            raise ValueError(f'max_bits 必须 ≥ 1: {max_bits}')
        self.max_bits = int(max_bits)

    def describe(self) -> Dict[str, Any]:
        return {'name': self.name, 'max_bits': self.max_bits}

    def _solve_impl(
        self,
        qubo: QuboInstance,
        k: int,
        seed: int
    ) -> Tuple[np.ndarray, Optional[float], Dict[str, Any]]:
        bits, energy = exact_solve(qubo, self.max_bits)
        return bits, energy, {}
