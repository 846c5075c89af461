"""
外部求解服务模块

凸二次规划求解（osqp 加 KKT 证书）
"""
