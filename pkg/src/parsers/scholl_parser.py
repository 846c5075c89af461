"""
Scholl 装箱文本格式解析器

格式:
    第 1 行  物品个数 n
    第 2 行  箱子容量
    其后 n 行，每行一个整数重量
空行忽略，箱子个数取 m = n
"""

import os
from typing import List, Tuple

from .base import BaseParser, ParseResult
from ..core.errors import InstanceError
from ..data.instances import BpInstance


def _parse_int(token: str, line_no: int, what: str) -> int:
    try:
        return int(token)
    except ValueError:
        raise InstanceError(f'第 {line_no} 行: {what}不是整数: {token!r}') from None


def parse_scholl_text(text: str, name: str = '') -> Tuple[BpInstance, List[str]]:
    """
    解析 Scholl 格式文本

    Args:
        text: 文件内容
        name: 实例标识

    Returns:
        (BP 实例, 警告列表)

    Raises:
        InstanceError: 格式错误，信息中包含行号
    """
    rows = [(no, line.strip()) for no, line in enumerate(text.splitlines(), start=1) if line.strip()]
    if len(rows) < 2:
        last = rows[-1][0] if rows else 0
        raise InstanceError(f'第 {last + 1} 行: 缺少{"容量" if rows else "物品个数"}')

    n_line, n_token = rows[0]
    n = _parse_int(n_token, n_line, '物品个数')
    if n < 1:
        raise InstanceError(f'第 {n_line} 行: 物品个数必须 ≥ 1: {n}')
    cap_line, cap_token = rows[1]
    cap = _parse_int(cap_token, cap_line, '容量')
    if cap < 1:
        raise InstanceError(f'第 {cap_line} 行: 容量必须 ≥ 1: {cap}')

    weight_rows = rows[2:]
    if len(weight_rows) < n:
        last = weight_rows[-1][0] if weight_rows else cap_line
        raise InstanceError(f'第 {last + 1} 行: 文件提前结束，期望 {n} 个重量，实际 {len(weight_rows)} 个')
    if len(weight_rows) > n:
        extra_line = weight_rows[n][0]
        raise InstanceError(f'第 {extra_line} 行: 多余的数据，物品个数声明为 {n}')

    weights = []
    for line_no, token in weight_rows:
        value = _parse_int(token, line_no, '重量')
        if value < 1:
            raise InstanceError(f'第 {line_no} 行: 重量必须 ≥ 1: {value}')
        weights.append(value)

    inst = BpInstance(n=n, m=n, cap=cap, w=tuple(weights), name=name)
    warnings = [
        f'第 {weight_rows[j][0]} 行: 物品 {j} 的重量 {weights[j]} 超过容量 {cap}'
        for j in inst.oversized_items
    ]
    return inst, warnings


def read_scholl(path: str) -> BpInstance:
    """
    读取 Scholl 格式文件

    Args:
        path: 文件路径

    Returns:
        BP 实例（超重物品只记录警告）

    Raises:
        InstanceError: 文件无法读取或格式错误
    """
    result = SchollParser().parse(path)
    if not result.success:
        raise InstanceError(f'{path}: {result.error}')
    return result.instance


def write_scholl(inst: BpInstance, path: str) -> None:
    """
    写出 Scholl 格式文件

    Args:
        inst: BP 实例
        path: 文件路径
    """
    directory = os.path.dirname(path)
    if directory:
        os.makedirs(directory, exist_ok=True)
    lines = [str(inst.n), str(inst.cap)] + [str(v) for v in inst.w]
    with open(path, 'w', encoding='utf-8') as f:
        f.write('\n'.join(lines) + '\n')


class SchollParser(BaseParser):
    """
    Scholl 格式解析器

    支持 .bpp 与 .txt 文件
    """

    def __init__(self):
        """初始化"""
        super().__init__(supported_extensions=['.bpp', '.txt'])

    def _parse_text(self, text: str, name: str) -> ParseResult:
        try:
            inst, warnings = parse_scholl_text(text, name)
        except InstanceError as e:
            return ParseResult.failure(str(e))
        return ParseResult(
            success=True,
            instance=inst,
            metadata={'kind': 'bp', 'format': 'scholl', 'n': inst.n, 'cap': inst.cap},
            warnings=warnings,
        )
