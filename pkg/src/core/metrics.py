"""
评价指标
"""

# 相对间隙分母的平移量
GAP_SHIFT = 1e-10


def gap(v: float, v_star: float) -> float:
    """
    相对最优间隙 |v - v*| / (1e-10 + |v*|)

    Args:
        v: 求得的目标值
        v_star: 已知最优值

    Returns:
        相对间隙
    """
    return abs(v - v_star) / (GAP_SHIFT + abs(v_star))
