"""
日志模块

一个具名 logger，控制台输出加可选的滚动日志文件；ADMM 逐轮记录走 DEBUG 级别
"""

import logging
import os
from dataclasses import dataclass
from logging.handlers import RotatingFileHandler
from pathlib import Path
from typing import Any, Optional, TYPE_CHECKING, Union

if TYPE_CHECKING:
    from .config import Config


DEFAULT_LOGGER_NAME = 'mbo_admm'
LOG_FORMAT = '%(asctime)s - %(name)s - %(levelname)s - %(filename)s:%(lineno)d - %(message)s'
DATE_FORMAT = '%Y-%m-%d %H:%M:%S'
LEVEL_NAMES = ('DEBUG', 'INFO', 'WARNING', 'ERROR', 'CRITICAL')

# 本模块添加的处理器带此标记，重新配置时只移除它们
_OWNED_MARK = '_mbo_admm_handler'


@dataclass(frozen=True)
class LogSettings:
    """
    日志设置

    Attributes:
        name: logger 名称
        level: 日志级别名称
        file: 日志文件路径（None 表示只输出到控制台）
        max_size_mb: 单个日志文件上限（MB）
        backup_count: 保留的滚动文件数
    """
    name: str = DEFAULT_LOGGER_NAME
    level: str = 'INFO'
    file: Optional[str] = None
    max_size_mb: int = 10
    backup_count: int = 5

    def __post_init__(self):
        """验证数据"""
        object.__setattr__(self, 'level', str(self.level).upper())
        if self.level not in LEVEL_NAMES:
            raise ValueError(f'未知的日志级别: {self.level}，可用: {list(LEVEL_NAMES)}')
        if self.max_size_mb <= 0:
            raise ValueError(f'max_size_mb 必须为正: {self.max_size_mb}')
        if self.backup_count < 0:
            raise ValueError(f'backup_count 不能为负: {self.backup_count}')

    @classmethod
    def from_config(cls, config: 'Config') -> 'LogSettings':
        """
        由配置管理器的 logging 段构造，相对路径按项目根目录解析

        Args:
            config: 配置管理器

        Returns:
            日志设置
        """
        log_file = config.get('logging.file')
        if log_file and not os.path.isabs(log_file):
            log_file = str(Path(__file__).parent.parent.parent / log_file)
        return cls(
            name=config.get('app.name', DEFAULT_LOGGER_NAME),
            level=config.get('logging.level', 'INFO'),
            file=log_file or None,
            max_size_mb=int(config.get('logging.max_size_mb', 10)),
            backup_count=int(config.get('logging.backup_count', 5)),
        )


class Logger:
    """
    日志管理器

    封装 logging.Logger；同名 logger 重复配置时替换而不是叠加处理器
    """

    def __init__(
        self,
        name: str = DEFAULT_LOGGER_NAME,
        log_file: Optional[str] = None,
        level: str = 'INFO',
        max_size_mb: int = 10,
        backup_count: int = 5,
        settings: Optional[LogSettings] = None
    ):
        """
        初始化日志管理器

        Args:
            name: logger 名称
            log_file: 日志文件路径
            level: 日志级别
            max_size_mb: 单个日志文件上限（MB）
            backup_count: 保留的滚动文件数
            settings: 完整设置（给出时忽略前面的参数）
        """
        self.settings = settings or LogSettings(
            name=name,
            level=level,
            file=log_file,
            max_size_mb=max_size_mb,
            backup_count=backup_count,
        )
        self.logger = logging.getLogger(self.settings.name)
        self.configure(self.settings)

    def configure(self, settings: LogSettings) -> None:
        """
        按设置重建处理器

        Args:
            settings: 日志设置
        """
        self.settings = settings
        self.logger.setLevel(getattr(logging, settings.level))
        for handler in [h for h in self.logger.handlers if getattr(h, _OWNED_MARK, False)]:
            self.logger.removeHandler(handler)
            handler.close()

        formatter = logging.Formatter(LOG_FORMAT, datefmt=DATE_FORMAT)
        handlers = [logging.StreamHandler()]
        if settings.file:
            directory = os.path.dirname(settings.file)
            if directory:
                os.makedirs(directory, exist_ok=True)
            handlers.append(RotatingFileHandler(
                settings.file,
                maxBytes=settings.max_size_mb * 1024 * 1024,
                backupCount=settings.backup_count,
                encoding='utf-8',
            ))
        for handler in handlers:
            handler.setLevel(logging.DEBUG)
            handler.setFormatter(formatter)
            setattr(handler, _OWNED_MARK, True)
            self.logger.addHandler(handler)

    def is_enabled_for(self, level: Union[int, str]) -> bool:
        """某级别是否会输出"""
        if isinstance(level, str):
            level = getattr(logging, level.upper())
        return self.logger.isEnabledFor(level)

    def iteration(self, k: int, **values: Any) -> None:
        """
        记录一轮迭代（DEBUG）

        Args:
            k: 迭代序号
            **values: 要记录的量，浮点数按 6 位有效数字输出
        """
        if not self.logger.isEnabledFor(logging.DEBUG):
            return
        parts = [f'k={k}']
        for key, value in values.items():
            parts.append(f'{key}={value:.6g}' if isinstance(value, float) else f'{key}={value}')
        self.logger.debug(' '.join(parts), stacklevel=2)

    def debug(self, message: str, *args, **kwargs):
        self.logger.debug(message, *args, stacklevel=2, **kwargs)

    def info(self, message: str, *args, **kwargs):
        self.logger.info(message, *args, stacklevel=2, **kwargs)

    def warning(self, message: str, *args, **kwargs):
        self.logger.warning(message, *args, stacklevel=2, **kwargs)

    def error(self, message: str, *args, **kwargs):
        self.logger.error(message, *args, stacklevel=2, **kwargs)

    def exception(self, message: str, *args, **kwargs):
        """记录异常（带堆栈）"""
        self.logger.exception(message, *args, stacklevel=2, **kwargs)


_global_logger: Optional[Logger] = None


def get_logger() -> Logger:
    """
    获取全局日志实例，未初始化时使用默认设置

    Returns:
        日志管理器
    """
    global _global_logger
    if _global_logger is None:
        _global_logger = Logger()
    return _global_logger


def init_logger(settings: Optional[LogSettings] = None, **kwargs: Any) -> Logger:
    """
    重新配置全局日志实例

    Args:
        settings: 日志设置
        **kwargs: 未给出 settings 时传给 LogSettings 的字段（log_file 等同于 file）

    Returns:
        日志管理器
    """
    global _global_logger
    if settings is None:
        if 'log_file' in kwargs:
            kwargs['file'] = kwargs.pop('log_file')
        settings = LogSettings(**kwargs)
    if _global_logger is None:
        _global_logger = Logger(settings=settings)
    else:
        _global_logger.logger = logging.getLogger(settings.name)
        _global_logger.configure(settings)
    return _global_logger


def init_logger_from_config(config: 'Config') -> Logger:
    """
    从配置初始化全局日志

    Args:
        config: 配置管理器

    Returns:
        日志管理器
    """
    return init_logger(LogSettings.from_config(config))
