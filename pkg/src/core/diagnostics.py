"""
收敛条件诊断

在求解前检查罚参数之间的关系，给出结构化的提示与警告，不改变求解过程
"""

from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Dict, List

from .admm import AdmmConfig
from .problem import MboProblem


class DiagnosticLevel(str, Enum):
    """诊断级别"""
    INFO = 'info'
    WARNING = 'warning'


@dataclass(frozen=True)
class DiagnosticItem:
    """
    单条诊断

    Attributes:
        code: 机器可读的代码
        level: 级别
        message: 说明
    """
    code: str
    level: DiagnosticLevel
    message: str

    def to_dict(self) -> Dict[str, Any]:
        return {'code': self.code, 'level': self.level.value, 'message': self.message}


@dataclass
class DiagnosticReport:
    """
    诊断报告

    Attributes:
        items: 诊断条目
    """
    items: List[DiagnosticItem] = field(default_factory=list)

    def add(self, code: str, level: DiagnosticLevel, message: str) -> None:
        self.items.append(DiagnosticItem(code, level, message))

    @property
    def codes(self) -> List[str]:
        return [item.code for item in self.items]

    @property
    def warnings(self) -> List[DiagnosticItem]:
        return [item for item in self.items if item.level is DiagnosticLevel.WARNING]

    def has(self, code: str) -> bool:
        return code in self.codes

    def to_dict(self) -> Dict[str, Any]:
        return {'items': [item.to_dict() for item in self.items]}


def diagnose(p: MboProblem, cfg: AdmmConfig) -> DiagnosticReport:
    """
    检查罚参数条件

    Args:
        p: 问题
        cfg: ADMM 参数

    Returns:
        诊断报告
    """
    report = DiagnosticReport()
    threshold = max(cfg.beta_init, cfg.c) if cfg.three_block else cfg.c
    label = 'max(β, c)' if cfg.three_block else 'c'

    if cfg.rho_init > threshold:
        report.add(
            'penalty_condition_holds',
            DiagnosticLevel.INFO,
            f'ρ_init={cfg.rho_init:g} > {label}={threshold:g}，满足罚参数充分大的收敛条件',
        )
    else:
        report.add(
            'penalty_condition_fails',
            DiagnosticLevel.WARNING,
            f'ρ_init={cfg.rho_init:g} ≤ {label}={threshold:g}，算法只作为启发式运行，不保证收敛',
        )

    if not cfg.rho_fixed:
        if cfg.rho_cap > threshold:
            if cfg.rho_init <= threshold:
                report.add(
                    'rho_cap_condition_holds',
                    DiagnosticLevel.INFO,
                    f'ρ 递增后上限 {cfg.rho_cap:g} 超过 {label}={threshold:g}，条件可能在迭代中变为成立',
                )
        else:
            report.add(
                'rho_cap_condition_fails',
                DiagnosticLevel.WARNING,
                f'ρ 上限 {cfg.rho_cap:g} ≤ {label}={threshold:g}，递增过程中条件始终不成立',
            )

    if p.has_equalities:
        if cfg.c >= cfg.rho_init:
            report.add(
                'equality_priority',
                DiagnosticLevel.WARNING,
                f'c={cfg.c:g} ≥ ρ_init={cfg.rho_init:g}，优先满足等式约束，不保证收敛',
            )
        report.add(
            'equality_softened',
            DiagnosticLevel.INFO,
            f'{p.n_eq} 个等式约束以罚项 c/2‖Gx-b‖² 进入 QUBO，结果可能违反等式',
        )

    if p.n_cont > 0:
        report.add(
            'continuous_caveat',
            DiagnosticLevel.INFO,
            f'存在 {p.n_cont} 个连续变量，收敛条件还依赖联合约束矩阵的常数，'
            f'此处只检查 ρ 与 β、c 的关系',
        )
    return report
