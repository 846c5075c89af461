"""
核心算法模块

问题定义、分裂子问题、ADMM 引擎、诊断、装箱与背包转换、精确参考解与批量实验
"""
