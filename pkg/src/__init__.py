"""
mbo-admm - 混合二进制优化的 ADMM 启发式求解器
"""

__version__ = "0.1.0"
__author__ = "mbo-admm contributors"
