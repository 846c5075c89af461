"""
测试公共夹具
"""

import os
import sys
from pathlib import Path

import numpy as np
import pytest

project_root = Path(__file__).parent.parent
if str(project_root) not in sys.path:
    sys.path.insert(0, str(project_root))

from src.core.admm import AdmmConfig
from src.core.problem import AdmmMode
from src.oracles.exact import ExactOracle
from src.services.qp_solver import QpSolver
from src.utils.config import Config


@pytest.fixture
def default_config(tmp_path, monkeypatch):
    """只含内置默认值的配置"""
    monkeypatch.delenv('MBO_ADMM_CONFIG', raising=False)
    monkeypatch.delenv('MBO_ADMM_LOG_LEVEL', raising=False)
    return Config(str(tmp_path / 'missing.json'))


@pytest.fixture
def exact_oracle():
    return ExactOracle()


@pytest.fixture
def qp_solver():
    return QpSolver()


@pytest.fixture
def rng():
    return np.random.default_rng(20201)


def fixed_config(blocks: int = 3, rho: float = 1001.0, beta: float = 1000.0, c: float = 0.0, **kwargs) -> AdmmConfig:
    """固定 ρ、β 的 ADMM 参数（小算例使用）"""
    values = dict(
        mode=AdmmMode.from_blocks(blocks),
        rho_init=rho,
        rho_fixed=True,
        beta_init=beta,
        beta_fixed=True,
        c=c,
        max_iter=200,
    )
    values.update(kwargs)
    return AdmmConfig(**values)


def random_problem(rng: np.random.Generator, n: int, n_cont: int = 0, with_eq: bool = True):
    """随机的小规模问题（P_u 半正定）"""
    from src.core.problem import MboProblem

    A = rng.normal(size=(n, n))
    Q = 0.5 * (A + A.T)
    kwargs = {}
    if with_eq:
        kwargs['G_eq'] = rng.integers(0, 2, size=(1, n)).astype(float)
        kwargs['b_eq'] = [1.0]
    kwargs['G_in'] = rng.normal(size=(2, n))
    kwargs['h_in'] = rng.uniform(0.5, 2.0, size=2)
    if n_cont:
        B = rng.normal(size=(n_cont, n_cont))
        kwargs['P_u'] = B @ B.T
        kwargs['r_u'] = rng.normal(size=n_cont)
        kwargs['L_z'] = rng.normal(size=(1, n))
        kwargs['L_u'] = rng.normal(size=(1, n_cont))
        kwargs['h_l'] = [3.0]
        kwargs['u_lb'] = -np.ones(n_cont)
        kwargs['u_ub'] = np.ones(n_cont)
    return MboProblem.build(Q=Q, a=rng.normal(size=n), **kwargs)
