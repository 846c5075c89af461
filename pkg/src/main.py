"""
mbo-admm - 主程序入口

混合二进制优化的 ADMM 启发式求解器
"""

import sys
from pathlib import Path
from typing import Optional, Sequence

# 添加项目根目录到 Python 路径
project_root = Path(__file__).parent.parent
if str(project_root) not in sys.path:
    sys.path.insert(0, str(project_root))

from src.ui.cli import run


def main(argv: Optional[Sequence[str]] = None) -> int:
    """主函数"""
    try:
        return run(argv)
    except KeyboardInterrupt:
        print('\n已中断')
        return 130


if __name__ == '__main__':
    sys.exit(main())
