"""
异常定义

求解器各层共用的异常类型
"""

from typing import Any, Optional


class MboError(Exception):
    """混合二进制求解器的基础异常"""


class DimensionError(MboError, ValueError):
    """矩阵/向量维度不一致"""


class ConfigError(MboError, ValueError):
    """配置参数非法"""


class InstanceError(MboError, ValueError):
    """实例文件格式错误或实例本身不可行"""


class SizeGuardError(MboError, ValueError):
    """枚举规模超过保护上限"""


class OracleError(MboError):
    """QUBO 预言机求解失败"""


class QpSolveError(MboError):
    """
    凸二次规划求解失败

    Attributes:
        solution: 失败时的求解结果（包含状态与 KKT 残差）
    """

    def __init__(self, message: str, solution: Optional[Any] = None):
        super().__init__(message)
        self.solution = solution
