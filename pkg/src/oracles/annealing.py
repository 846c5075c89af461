"""
模拟退火预言机

QUBO 转成 dimod 的 BinaryQuadraticModel，由 dwave-samplers 的
SimulatedAnnealingSampler 采样（每次重启一条读数），再用 SteepestDescentSolver
把每个读数下降到局部最优
"""

import math
from typing import Any, Dict, Optional, Tuple

import numpy as np
from dimod import BinaryQuadraticModel, SampleSet
from dwave.samplers import SimulatedAnnealingSampler, SteepestDescentSolver

from ..core.splitting import QuboInstance
from .base import BaseOracle


def default_temperatures(qubo: QuboInstance) -> Tuple[float, float]:
    """
    由实例估计起止温度

    T_hot = max|ΔE| / ln 2，T_cold = min 非零 |ΔE| / ln 100，
    其中 ΔE 为单比特翻转能量变化的估计

    Args:
        qubo: QUBO 实例

    Returns:
        (t_init, t_final)
    """
    diag = np.diag(qubo.Qm)
    off_diag = np.abs(qubo.Qm).sum(axis=1) - np.abs(diag)
    local = np.abs(diag + qubo.lin)
    delta_max = float(np.max(local + 2.0 * off_diag))
    nonzero = np.concatenate([local[local > 0], 2.0 * np.abs(qubo.Qm[qubo.Qm != 0])])
    if delta_max <= 0:
        return 1.0, 1e-3
    delta_min = float(nonzero.min()) if nonzero.size else delta_max * 1e-3
    t_init = delta_max / math.log(2.0)
    t_final = min(delta_min / math.log(100.0), t_init)
    return t_init, t_final


def to_bqm(qubo: QuboInstance) -> BinaryQuadraticModel:
    """
    QUBO 实例转成变量为 0..n-1 的二进制 BQM

    对 0/1 变量 sᵀQm s = Σ Qm_ii s_i + Σ_{i<j} 2 Qm_ij s_i s_j，
    因此对角并入一次项，上三角乘 2

    Args:
        qubo: QUBO 实例

    Returns:
        能量与 qubo.energy 一致的 BQM
    """
    diag = np.diag(qubo.Qm) + qubo.lin
    coefficients = {(i, i): float(diag[i]) for i in range(qubo.n)}
    rows, cols = np.nonzero(np.triu(qubo.Qm, k=1))
    for i, j in zip(rows.tolist(), cols.tolist()):
        coefficients[(i, j)] = 2.0 * float(qubo.Qm[i, j])
    return BinaryQuadraticModel.from_qubo(coefficients, offset=qubo.off)


def sample_matrix(sampleset: SampleSet, n: int) -> np.ndarray:
    """按变量 0..n-1 的顺序取出 (读数, n) 的 0/1 矩阵"""
    order = [sampleset.variables.index(i) for i in range(n)]
    return np.asarray(sampleset.record.sample[:, order], dtype=np.int8)


class SimulatedAnnealingOracle(BaseOracle):
    """
    模拟退火预言机
    """

    def __init__(
        self,
        sweeps: int = 1000,
        restarts: int = 8,
        t_init: Optional[float] = None,
        t_final: Optional[float] = None
    ):
        """
        初始化

        Args:
            sweeps: 每条读数的扫描次数
            restarts: 读数（独立重启）个数
            t_init: 起始温度，None 表示由实例估计
            t_final: 终止温度，None 表示由实例估计
        """
        super().__init__('sa')
        if sweeps < 1 or restarts < 1:
            raise ValueError(f'sweeps 与 restarts 必须 ≥ 1: {sweeps}, {restarts}')
        for value in (t_init, t_final):
            if value is not None and not value > 0:
                raise ValueError(f'温度必须为正: {value}')
        if t_init is not None and t_final is not None and t_final > t_init:
            raise ValueError(f't_final 不能大于 t_init: {t_final} > {t_init}')
        self.sweeps = int(sweeps)
        self.restarts = int(restarts)
        self.t_init = t_init
        self.t_final = t_final
        self._sampler = SimulatedAnnealingSampler()
        self._descent = SteepestDescentSolver()

    def describe(self) -> Dict[str, Any]:
        return {
            'name': self.name,
            'sweeps': self.sweeps,
            'restarts': self.restarts,
            't_init': self.t_init,
            't_final': self.t_final,
        }

    def temperatures(self, qubo: QuboInstance) -> Tuple[float, float]:
        """实际使用的 (起始温度, 终止温度)，未指定的一端由实例估计"""
        t_hot, t_cold = default_temperatures(qubo)
        if self.t_init is not None:
            t_hot = self.t_init
        if self.t_final is not None:
            t_cold = self.t_final
        return t_hot, min(t_cold, t_hot)

    @staticmethod
    def sampler_seed(seed: int, k: int) -> int:
        """由 (seed, k) 派生采样器需要的 32 位种子"""
        sequence = np.random.SeedSequence([int(seed) & 0xFFFFFFFFFFFFFFFF, int(k), 0])
        return int(sequence.generate_state(1, dtype=np.uint32)[0])

    def _solve_impl(
        self,
        qubo: QuboInstance,
        k: int,
        seed: int
    ) -> Tuple[np.ndarray, Optional[float], Dict[str, Any]]:
        bqm = to_bqm(qubo)
        t_hot, t_cold = self.temperatures(qubo)
        annealed = self._sampler.sample(
            bqm,
            num_reads=self.restarts,
            num_sweeps=self.sweeps,
            beta_range=[1.0 / t_hot, 1.0 / t_cold],
            beta_schedule_type='geometric',
            seed=self.sampler_seed(seed, k),
        )
        quenched = self._descent.sample(bqm, initial_states=annealed)

        states = sample_matrix(quenched, qubo.n)
        energies = qubo.energies(states)
        winner = int(np.argmin(energies))
        metadata = {
            't_init': t_hot,
            't_final': t_cold,
            'chain_energies': [float(e) for e in energies],
        }
        return states[winner], float(energies[winner]), metadata


def sa_solve(
    qubo: QuboInstance,
    sweeps: int = 1000,
    restarts: int = 8,
    t_init: Optional[float] = None,
    t_final: Optional[float] = None,
    seed: int = 0
) -> Tuple[np.ndarray, float]:
    """
    便捷函数：模拟退火求解 QUBO

    Returns:
        (比特串, 能量)
    """
    oracle = SimulatedAnnealingOracle(sweeps=sweeps, restarts=restarts, t_init=t_init, t_final=t_final)
    result = oracle.solve(qubo, k=1, seed=seed)
    return result.bits, result.energy
