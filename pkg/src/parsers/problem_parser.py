"""
JSON 实例解析器

按 type 字段区分:
    - 'mbo'（或缺省）: 混合二进制问题，字段同 MboProblem.to_dict()
    - 'bp' / 'misk': 生成的基准实例
"""

import json
import os
from typing import Union

from .base import BaseParser, ParseResult, get_parser_factory
from ..core.errors import MboError
from ..core.problem import MboProblem
from ..data.instances import INSTANCE_TYPES, Instance, instance_from_dict


class JsonInstanceParser(BaseParser):
    """
    JSON 实例解析器
    """

    def __init__(self):
        """初始化"""
        super().__init__(supported_extensions=['.json'])

    def _parse_text(self, text: str, name: str) -> ParseResult:
        try:
            data = json.loads(text)
        except json.JSONDecodeError as e:
            return ParseResult.failure(f'JSON 格式错误 (第 {e.lineno} 行): {e.msg}')
        if not isinstance(data, dict):
            return ParseResult.failure('JSON 顶层必须是对象')

        kind = data.get('type', 'mbo')
        try:
            if kind == 'mbo':
                instance = MboProblem.from_dict(data)
            elif kind in INSTANCE_TYPES:
                instance = instance_from_dict(data)
            else:
                return ParseResult.failure(f'未知的实例类型: {kind!r}')
        except (MboError, ValueError, KeyError, TypeError) as e:
            return ParseResult.failure(f'实例字段错误: {e}')

        warnings = []
        oversized = getattr(instance, 'oversized_items', [])
        if oversized:
            warnings.append(f'物品 {oversized} 的重量超过容量')
        return ParseResult(
            success=True,
            instance=instance,
            metadata={'kind': kind},
            warnings=warnings,
        )


def dump_problem(p: MboProblem, path: str) -> None:
    """
    保存问题为 JSON

    Args:
        p: 问题
        path: 文件路径
    """
    directory = os.path.dirname(path)
    if directory:
        os.makedirs(directory, exist_ok=True)
    with open(path, 'w', encoding='utf-8') as f:
        json.dump(p.to_dict(), f, indent=2)


def load_any(path: str) -> Union[MboProblem, Instance]:
    """
    读取任意支持的实例文件

    Args:
        path: 文件路径

    Returns:
        问题或基准实例

    Raises:
        InstanceError: 无法解析
    """
    return get_parser_factory().parse(path).unwrap()
