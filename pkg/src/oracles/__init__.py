"""
QUBO 预言机模块

提供精确枚举、模拟退火、含噪与装箱局部搜索预言机，并把前三者注册到全局工厂
"""

from typing import Any, Dict, Optional

from .base import (
    BaseOracle,
    IQuboOracle,
    OracleFactory,
    OracleResult,
    get_oracle_factory,
)
from .annealing import SimulatedAnnealingOracle, sa_solve
from .exact import ExactOracle, exact_solve
from .local_search import LocalSearchOracle
from .noisy import NoiseSchedule, NoisyOracle, noisy_wrap


def _build_noisy(p0: float = 0.5, base: str = 'exact', **base_params: Any) -> IQuboOracle:
    inner = get_oracle_factory().create(base, **base_params)
    return NoisyOracle(inner, NoiseSchedule(p0=p0))


def register_builtin_oracles(factory: Optional[OracleFactory] = None) -> OracleFactory:
    """
    注册内置预言机

    Args:
        factory: 工厂，默认为全局工厂

    Returns:
        工厂
    """
    factory = factory or get_oracle_factory()
    factory.register_oracle('exact', ExactOracle, '全枚举，平局取字典序最小')
    factory.register_oracle('sa', SimulatedAnnealingOracle, 'dwave-samplers 模拟退火加最速下降')
    factory.register_oracle('noisy', _build_noisy, '对基础预言机结果逐位随机翻转')
    return factory


def oracle_params(name: str, config=None, **overrides: Any) -> Dict[str, Any]:
    """
    合并预言机参数

    参数来自配置的 oracles.<name> 段，overrides 中非 None 的值优先；
    含噪预言机还会带上其基础预言机的配置

    Args:
        name: 预言机名称
        config: 配置管理器（None 表示只用 overrides）
        **overrides: 覆盖参数

    Returns:
        传给工厂的参数字典
    """
    params = dict(config.section(f'oracles.{name}')) if config is not None else {}
    params.update({key: value for key, value in overrides.items() if value is not None})
    if name == 'noisy' and config is not None:
        base_name = params.get('base', 'exact')
        for key, value in config.section(f'oracles.{base_name}').items():
            params.setdefault(key, value)
    return params


def create_oracle(name: str, config=None, **overrides: Any) -> IQuboOracle:
    """
    按配置创建预言机

    Args:
        name: 预言机名称
        config: 配置管理器
        **overrides: 覆盖参数

    Returns:
        预言机
    """
    return get_oracle_factory().create(name, **oracle_params(name, config, **overrides))


register_builtin_oracles()

__all__ = [
    'BaseOracle',
    'ExactOracle',
    'IQuboOracle',
    'LocalSearchOracle',
    'NoiseSchedule',
    'NoisyOracle',
    'OracleFactory',
    'OracleResult',
    'SimulatedAnnealingOracle',
    'create_oracle',
    'oracle_params',
    'exact_solve',
    'get_oracle_factory',
    'noisy_wrap',
    'register_builtin_oracles',
    'sa_solve',
]
