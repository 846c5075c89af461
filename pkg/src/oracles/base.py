"""
QUBO 预言机基础模块

定义 QUBO 预言机的抽象接口、结果结构和工厂
"""

from abc import ABC, abstractmethod
from dataclasses import dataclass, field
from typing import Any, Callable, Dict, List, Optional, Tuple
import time

import numpy as np

from ..core.errors import MboError, OracleError
from ..core.splitting import QuboInstance


# 返回能量与重新计算能量的一致性容差
ENERGY_TOL = 1e-9


@dataclass
class OracleResult:
    """
    预言机求解结果

    Attributes:
        bits: 比特串（0/1 整数向量）
        energy: 比特串的能量 sᵀQm s + linᵀs + off
        oracle: 预言机名称
        solve_time: 求解耗时（秒）
        metadata: 附加信息（翻转次数、温度等）
    """
    bits: np.ndarray
    energy: float
    oracle: str = ''
    solve_time: float = 0.0
    metadata: Dict[str, Any] = field(default_factory=dict)

    def __post_init__(self):
        """验证数据"""
        bits = np.asarray(self.bits)
        if bits.ndim != 1 or not np.all((bits == 0) | (bits == 1)):
            raise ValueError('bits 必须是 0/1 向量')
        self.bits = bits.astype(np.int8)
        self.energy = float(self.energy)
        if not np.isfinite(self.energy):
            raise ValueError(f'能量必须是有限值: {self.energy}')


class IQuboOracle(ABC):
    """
    QUBO 预言机接口

    所有预言机都应该继承此类并实现 solve 方法
    """

    name: str = 'oracle'

    @abstractmethod
    def solve(self, qubo: QuboInstance, k: int = 1, seed: int = 0) -> OracleResult:
        """
        求解 QUBO

        Args:
            qubo: QUBO 实例
            k: 外层迭代序号（从 1 开始）
            seed: 随机种子

        Returns:
            求解结果
        """
        pass

    def describe(self) -> Dict[str, Any]:
        """
        预言机参数（可选实现，用于报告）

        Returns:
            参数字典
        """
        return {'name': self.name}


class BaseOracle(IQuboOracle):
    """
    基础预言机实现

    提供计时、参数检查与能量一致性处理，具体预言机重写 _solve_impl
    """

    def __init__(self, name: str):
        """
        初始化

        Args:
            name: 预言机名称
        """
        self.name = name

    def solve(self, qubo: QuboInstance, k: int = 1, seed: int = 0) -> OracleResult:
        """
        求解 QUBO（带计时和错误处理）

        子类应该重写 _solve_impl 方法而不是这个方法
        """
        if k < 1:
            raise ValueError(f'迭代序号必须 ≥ 1: {k}')
        start_time = time.perf_counter()
        try:
            bits, energy, metadata = self._solve_impl(qubo, k, seed)
        except MboError:
            raise
        except Exception as e:
            raise OracleError(f'{self.name} 求解失败: {e}') from e

        bits = np.asarray(bits, dtype=np.int8)
        if bits.shape != (qubo.n,):
            raise OracleError(f'{self.name} 返回的比特串长度 {bits.shape} 与 n={qubo.n} 不一致')
        # 以重新计算的能量为准
        recomputed = qubo.energy(bits)
        if energy is not None and abs(recomputed - energy) > ENERGY_TOL * max(1.0, abs(recomputed)):
            metadata = dict(metadata, reported_energy=float(energy))
        return OracleResult(
            bits=bits,
            energy=recomputed,
            oracle=self.name,
            solve_time=time.perf_counter() - start_time,
            metadata=metadata,
        )

    @abstractmethod
    def _solve_impl(
        self,
        qubo: QuboInstance,
        k: int,
        seed: int
    ) -> Tuple[np.ndarray, Optional[float], Dict[str, Any]]:
        """
        具体的求解实现

        Args:
            qubo: QUBO 实例
            k: 外层迭代序号
            seed: 随机种子

        Returns:
            (比特串, 能量或 None, 附加信息)
        """
        pass


OracleBuilder = Callable[..., IQuboOracle]


class OracleFactory:
    """
    预言机工厂

    按名称登记预言机构造函数，命令行与基准测试通过名称创建预言机
    """

    def __init__(self):
        """初始化工厂"""
        self._builders: Dict[str, OracleBuilder] = {}
        self._descriptions: Dict[str, str] = {}

    def register_oracle(self, name: str, builder: OracleBuilder, description: str = '') -> None:
        """
        注册预言机

        Args:
            name: 预言机名称
            builder: 构造函数，接受关键字参数并返回预言机
            description: 简短说明
        """
        self._builders[name.lower()] = builder
        self._descriptions[name.lower()] = description

    def create(self, name: str, **params: Any) -> IQuboOracle:
        """
        创建预言机

        Args:
            name: 预言机名称
            **params: 传给构造函数的参数

        Returns:
            预言机实例
        """
        builder = self._builders.get(name.lower())
        if builder is None:
            raise OracleError(f'未知的预言机: {name}，可用: {self.get_oracle_names()}')
        return builder(**params)

    def get_oracle_names(self) -> List[str]:
        """
        获取所有已注册的预言机名称

        Returns:
            名称列表
        """
        return list(self._builders.keys())

    def get_description(self, name: str) -> str:
        """获取预言机说明"""
        return self._descriptions.get(name.lower(), '')

    def unregister_oracle(self, name: str) -> bool:
        """
        注销预言机

        Args:
            name: 预言机名称

        Returns:
            是否成功注销
        """
        key = name.lower()
        if key not in self._builders:
            return False
        del self._builders[key]
        del self._descriptions[key]
        return True


# 全局预言机工厂实例
oracle_factory = OracleFactory()


def get_oracle_factory() -> OracleFactory:
    """
    获取全局预言机工厂实例

    Returns:
        预言机工厂
    """
    return oracle_factory
