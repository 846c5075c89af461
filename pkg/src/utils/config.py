"""
配置管理模块

内置默认值 → JSON 配置文件 → 环境变量，逐层覆盖。

环境变量:
    MBO_ADMM_CONFIG       配置文件路径
    MBO_ADMM_LOG_LEVEL    日志级别
    MBO_ADMM__A__B=值     覆盖键 a.b，值按 JSON 解析，解析失败时按字符串
"""

import copy
import json
import os
from pathlib import Path
from typing import Any, Dict, List, Optional

from dotenv import load_dotenv


ENV_CONFIG_PATH = 'MBO_ADMM_CONFIG'
ENV_LOG_LEVEL = 'MBO_ADMM_LOG_LEVEL'
ENV_OVERRIDE_PREFIX = 'MBO_ADMM__'

DEFAULT_CONFIG: Dict[str, Any] = {
    'app': {
        'name': 'mbo_admm',
        'version': '0.1.0',
    },
    'admm': {
        'mode': 'three_block',
        'rho_init': 1.0e4,
        'rho_growth': 1.1,
        'rho_cap': 1.0e7,
        'rho_fixed': False,
        'beta_init': 1.0e3,
        'beta_gamma': 2.0,
        'beta_omega': 0.5,
        'beta_fixed': False,
        'c': 1.0e5,
        'mu': 1.0e3,
        'eps': 1.0e-4,
        'max_iter': 500,
        'time_limit': 3600.0,
        'seed': 0,
        'polish': False,
        'merit_include_equalities': False,
        'track_qubo_optimality': False,
        'qubo_check_max_bits': 22,
    },
    'qp': {
        'tol': 1.0e-8,
        'max_iter': 20000,
    },
    'oracles': {
        'default': 'exact',
        'exact': {'max_bits': 24},
        'sa': {'sweeps': 1000, 'restarts': 8, 't_init': None, 't_final': None},
        'noisy': {'p0': 0.5, 'base': 'exact'},
    },
    'bench': {
        'workers': 1,
        'results_dir': 'results',
        'master_seed': 2020,
        'bp': {'sizes': [2, 3, 4], 'capacity': 40, 'instances_per_size': 20},
        'misk': {'families': [5, 8, 11, 14], 'items_per_family': 10, 'instances_per_size': 3, 'group': 1},
    },
    'logging': {
        'level': 'INFO',
        'file': None,
        'max_size_mb': 10,
        'backup_count': 5,
    },
}


def default_config_path() -> str:
    """项目自带的配置文件路径"""
    return str(Path(__file__).parent.parent.parent / 'resources' / 'config' / 'config.json')


def _parse_env_value(raw: str) -> Any:
    try:
        return json.loads(raw)
    except json.JSONDecodeError:
        return raw


class Config:
    """
    配置管理器

    点号路径访问（'admm.rho_init'）；文件读取失败不抛异常，
    错误记录在 load_errors 中，待日志初始化后由调用方输出
    """

    def __init__(self, config_path: Optional[str] = None):
        """
        初始化配置管理器

        Args:
            config_path: 配置文件路径，None 时依次使用 MBO_ADMM_CONFIG 和项目自带路径
        """
        load_dotenv()
        self._config: Dict[str, Any] = copy.deepcopy(DEFAULT_CONFIG)
        self.load_errors: List[str] = []
        self._config_path = config_path or os.environ.get(ENV_CONFIG_PATH) or default_config_path()

        if os.path.exists(self._config_path):
            self.load(self._config_path)
        self._apply_environment()

    @property
    def path(self) -> str:
        return self._config_path

    def _apply_environment(self) -> None:
        level = os.environ.get(ENV_LOG_LEVEL)
        if level:
            self.set('logging.level', level.upper())
        for name, raw in os.environ.items():
            if name.startswith(ENV_OVERRIDE_PREFIX) and len(name) > len(ENV_OVERRIDE_PREFIX):
                key = '.'.join(part.lower() for part in name[len(ENV_OVERRIDE_PREFIX):].split('__'))
                self.set(key, _parse_env_value(raw))

    def load(self, config_path: str) -> bool:
        """
        合并 JSON 配置文件

        Args:
            config_path: 配置文件路径

        Returns:
            是否加载成功
        """
        try:
            with open(config_path, 'r', encoding='utf-8') as f:
                loaded = json.load(f)
        except (OSError, json.JSONDecodeError) as e:
            self.load_errors.append(f'加载配置文件失败 {config_path}: {e}')
            return False
        if not isinstance(loaded, dict):
            self.load_errors.append(f'配置文件顶层必须是对象: {config_path}')
            return False
        self._merge(self._config, loaded, prefix='')
        self._config_path = config_path
        return True

    def _merge(self, base: Dict[str, Any], updates: Dict[str, Any], prefix: str) -> None:
        """递归合并；默认是配置段的键不接受非对象值"""
        for key, value in updates.items():
            current = base.get(key)
            if isinstance(current, dict):
                if isinstance(value, dict):
                    self._merge(current, value, f'{prefix}{key}.')
                else:
                    self.load_errors.append(f'配置段 {prefix}{key} 必须是对象，忽略 {value!r}')
            else:
                base[key] = value

    def save(self, config_path: Optional[str] = None) -> bool:
        """
        保存当前配置

        Args:
            config_path: 保存路径，None 表示当前配置文件

        Returns:
            是否保存成功
        """
        path = config_path or self._config_path
        try:
            directory = os.path.dirname(path)
            if directory:
                os.makedirs(directory, exist_ok=True)
            with open(path, 'w', encoding='utf-8') as f:
                json.dump(self._config, f, indent=2, ensure_ascii=False)
        except OSError as e:
            self.load_errors.append(f'保存配置文件失败 {path}: {e}')
            return False
        return True

    def get(self, key: str, default: Any = None) -> Any:
        """
        按点号路径取值

        Args:
            key: 例如 'oracles.sa.sweeps'
            default: 路径不存在时的返回值

        Returns:
            配置值
        """
        value: Any = self._config
        for part in key.split('.'):
            if not isinstance(value, dict) or part not in value:
                return default
            value = value[part]
        return value

    def set(self, key: str, value: Any) -> None:
        """
        按点号路径赋值，缺失的中间段自动创建

        Raises:
            ValueError: 路径穿过非对象的值
        """
        parts = key.split('.')
        node = self._config
        for depth, part in enumerate(parts[:-1]):
            node = node.setdefault(part, {})
            if not isinstance(node, dict):
                raise ValueError(f'{".".join(parts[:depth + 1])} 不是配置段，无法设置 {key}')
        node[parts[-1]] = value

    def section(self, key: str) -> Dict[str, Any]:
        """某个配置段的深拷贝，不存在或不是对象时返回空字典"""
        value = self.get(key, {})
        return copy.deepcopy(value) if isinstance(value, dict) else {}

    def to_dict(self) -> Dict[str, Any]:
        return copy.deepcopy(self._config)


_global_config: Optional[Config] = None


def get_config() -> Config:
    """获取全局配置，未初始化时按默认路径加载"""
    global _global_config
    if _global_config is None:
        _global_config = Config()
    return _global_config


def init_config(config_path: Optional[str] = None) -> Config:
    """
    重新加载全局配置

    Args:
        config_path: 配置文件路径

    Returns:
        配置管理器
    """
    global _global_config
    _global_config = Config(config_path)
    return _global_config
