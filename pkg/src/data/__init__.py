"""
数据模块

基准实例结构、随机生成器与内置小算例
"""
