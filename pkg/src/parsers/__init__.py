"""
实例解析器模块

JSON（混合二进制问题与生成的基准实例）和 Scholl 装箱文本格式
"""

from .base import BaseParser, IInstanceParser, ParseResult, ParserFactory, get_parser_factory
from .problem_parser import JsonInstanceParser, dump_problem, load_any
from .scholl_parser import SchollParser, parse_scholl_text, read_scholl, write_scholl


def register_builtin_parsers(factory: ParserFactory = None) -> ParserFactory:
    """
    注册内置解析器

    Args:
        factory: 工厂，默认为全局工厂

    Returns:
        工厂
    """
    factory = factory or get_parser_factory()
    factory.register_parser('json', ['.json'], JsonInstanceParser())
    factory.register_parser('scholl', ['.bpp', '.txt'], SchollParser())
    return factory


register_builtin_parsers()

__all__ = [
    'BaseParser',
    'IInstanceParser',
    'JsonInstanceParser',
    'ParseResult',
    'ParserFactory',
    'SchollParser',
    'dump_problem',
    'get_parser_factory',
    'load_any',
    'parse_scholl_text',
    'read_scholl',
    'register_builtin_parsers',
    'write_scholl',
]
