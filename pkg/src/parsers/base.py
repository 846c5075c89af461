"""
实例解析器基础模块

解析结果、解析器接口与按扩展名分发的工厂。解析器不因坏文件抛异常，
而是返回带错误信息的失败结果，由调用方决定是否转成 InstanceError
"""

import os
import time
from abc import ABC, abstractmethod
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional

from ..core.errors import InstanceError
from ..utils.logger import get_logger


def _normalize_extension(ext: str) -> str:
    ext = ext.lower()
    return ext if ext.startswith('.') else '.' + ext


@dataclass
class ParseResult:
    """
    实例解析结果

    Attributes:
        success: 解析是否成功
        instance: 解析得到的对象（MboProblem、BpInstance 或 MiskInstance）
        metadata: 附加信息（格式、路径、行数等）
        error: 失败原因
        warnings: 不影响解析的警告（例如物品超重）
        parse_time: 解析耗时（秒）
    """
    success: bool
    instance: Optional[Any] = None
    metadata: Dict[str, Any] = field(default_factory=dict)
    error: Optional[str] = None
    warnings: List[str] = field(default_factory=list)
    parse_time: float = 0.0

    def __post_init__(self):
        """验证数据"""
        if not self.success and not self.error:
            raise ValueError("解析失败时必须提供错误信息")
        if self.success and self.instance is None:
            raise ValueError("解析成功时必须提供实例")

    @classmethod
    def failure(cls, error: str, **metadata: Any) -> 'ParseResult':
        return cls(success=False, error=error, metadata=dict(metadata))

    def unwrap(self) -> Any:
        """
        取出实例

        Raises:
            InstanceError: 解析失败
        """
        if not self.success:
            raise InstanceError(self.error)
        return self.instance


class IInstanceParser(ABC):
    """实例解析器接口"""

    @abstractmethod
    def supports(self, file_path: str) -> bool:
        """是否按扩展名支持该文件"""

    @abstractmethod
    def parse(self, file_path: str) -> ParseResult:
        """
        解析实例文件

        Args:
            file_path: 文件路径

        Returns:
            解析结果
        """


class BaseParser(IInstanceParser):
    """
    基础解析器

    统一负责读取 UTF-8 文本、计时、异常转换与警告记录；
    具体解析器只实现 _parse_text
    """

    def __init__(self, supported_extensions: List[str]):
        """
        初始化

        Args:
            supported_extensions: 支持的扩展名（可不带点）
        """
        self.supported_extensions = [_normalize_extension(ext) for ext in supported_extensions]

    def supports(self, file_path: str) -> bool:
        return _normalize_extension(os.path.splitext(file_path)[1]) in self.supported_extensions

    def parse(self, file_path: str) -> ParseResult:
        """读取文件并交给 _parse_text"""
        start = time.perf_counter()
        result = self._read_and_parse(file_path)
        result.metadata.setdefault('path', file_path)
        result.parse_time = time.perf_counter() - start
        if result.warnings:
            logger = get_logger()
            for message in result.warnings:
                logger.warning(f'{file_path}: {message}')
        return result

    def _read_and_parse(self, file_path: str) -> ParseResult:
        if not (os.path.isfile(file_path) and os.access(file_path, os.R_OK)):
            return ParseResult.failure(f'文件不存在或无法访问: {file_path}')
        try:
            with open(file_path, 'r', encoding='utf-8') as f:
                text = f.read()
        except (OSError, UnicodeDecodeError) as e:
            return ParseResult.failure(f'无法读取 {file_path}: {e}')

        name = os.path.splitext(os.path.basename(file_path))[0]
        try:
            result = self._parse_text(text, name)
        except Exception as e:
            return ParseResult.failure(f'解析失败: {e}')
        result.metadata.setdefault('lines', len(text.splitlines()))
        return result

    @abstractmethod
    def _parse_text(self, text: str, name: str) -> ParseResult:
        """
        解析文件内容

        Args:
            text: 文件全文
            name: 由文件名得到的实例标识（不含扩展名）

        Returns:
            解析结果
        """


class ParserFactory:
    """
    解析器工厂

    扩展名到解析器名称、名称到解析器两级映射，后注册的同名扩展名覆盖先前的
    """

    def __init__(self):
        self._parsers: Dict[str, IInstanceParser] = {}
        self._extension_map: Dict[str, str] = {}

    def register_parser(self, name: str, extensions: List[str], parser: IInstanceParser) -> None:
        """
        注册解析器

        Args:
            name: 解析器名称
            extensions: 扩展名列表（如 ['.json']）
            parser: 解析器实例
        """
        self._parsers[name] = parser
        for ext in extensions:
            self._extension_map[_normalize_extension(ext)] = name

    def unregister_parser(self, name: str) -> bool:
        """注销解析器及其扩展名，未注册时返回 False"""
        if self._parsers.pop(name, None) is None:
            return False
        self._extension_map = {ext: owner for ext, owner in self._extension_map.items() if owner != name}
        return True

    def get_parser(self, file_path: str) -> Optional[IInstanceParser]:
        """按扩展名查找解析器，没有时返回 None"""
        owner = self._extension_map.get(_normalize_extension(os.path.splitext(file_path)[1]))
        return self._parsers.get(owner) if owner else None

    def parse(self, file_path: str) -> ParseResult:
        """
        用匹配的解析器解析文件

        Args:
            file_path: 文件路径

        Returns:
            解析结果（没有匹配的解析器时为失败结果）
        """
        parser = self.get_parser(file_path)
        if parser is None:
            ext = os.path.splitext(file_path)[1]
            return ParseResult.failure(f'不支持的文件类型: {ext or file_path}，可用: {self.get_supported_extensions()}')
        return parser.parse(file_path)

    def get_supported_extensions(self) -> List[str]:
        return list(self._extension_map)

    def get_parser_names(self) -> List[str]:
        return list(self._parsers)


_parser_factory = ParserFactory()


def get_parser_factory() -> ParserFactory:
    """获取全局解析器工厂"""
    return _parser_factory
