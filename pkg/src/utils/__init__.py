"""
工具类模块

配置管理与日志
"""
