"""
基准测试批量运行

按主种子生成（或载入）BP / MISK 实例，逐个运行 ADMM，与精确解比较并汇总:
    - 每个实例一行: 迭代次数、间隙、可行、最优、QUBO 最优比例、耗时
    - 汇总行 ALL: 平均迭代次数、平均间隙、可行率、最优率、平均 QUBO 最优比例
"""

import csv
import hashlib
import json
import os
from concurrent.futures import ProcessPoolExecutor, as_completed
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np
from tqdm import tqdm

from .admm import AdmmConfig, SolveReport, solve
from .bin_packing import bp_to_mbo, first_fit_decreasing
from .exact import EXACT_MAX_BITS, exact_mbo_solve
from .knapsack import misk_to_mbo, solve_misk_exact
from .metrics import gap
from .problem import AdmmMode, MboProblem, is_feasible, objective as problem_objective
from ..data.generators import gen_bp, gen_misk
from ..data.instances import BpInstance, Instance, MiskInstance
from ..oracles import LocalSearchOracle, get_oracle_factory
from ..oracles.base import IQuboOracle
from ..services.qp_solver import QpSolver
from ..utils.logger import get_logger


CSV_HEADER = ['instance', 'n_bin', 'IT', 'gap', 'feasible', 'optimal', 'qubo_frac', 'runtime_s']
AGGREGATE_LABEL = 'ALL'
# 判定最优的间隙容差
OPTIMAL_GAP_TOL = 1e-6


def instance_seed(master_seed: int, idx: int) -> int:
    """由主种子和实例序号派生 32 位种子"""
    return int(np.random.SeedSequence([int(master_seed), int(idx)]).generate_state(1)[0])


@dataclass
class CampaignRow:
    """
    单个实例的结果

    Attributes:
        instance: 实例标识
        n_bin: 二进制变量数
        iterations: 外层迭代次数 (IT)
        gap: 相对最优间隙（未知最优值时为 None）
        feasible: 计入的点是否可行
        optimal: 是否达到最优（未知最优值时为 None）
        qubo_frac: QUBO 子问题精确最优的比例（未检查时为 None）
        runtime_s: 求解耗时
        objective: 计入的目标值（开启修复且修复后可行时取修复后的点）
        v_star: 已知最优值
        extra: 附加信息（例如 FFD 箱子数）
    """
    instance: str
    n_bin: int
    iterations: int
    gap: Optional[float]
    feasible: bool
    optimal: Optional[bool]
    qubo_frac: Optional[float]
    runtime_s: float
    objective: float = float('nan')
    v_star: Optional[float] = None
    extra: Dict[str, Any] = field(default_factory=dict)

    def as_csv_row(self) -> List[Any]:
        return [
            self.instance,
            self.n_bin,
            self.iterations,
            '' if self.gap is None else repr(self.gap),
            int(self.feasible),
            '' if self.optimal is None else int(self.optimal),
            '' if self.qubo_frac is None else repr(self.qubo_frac),
            f'{self.runtime_s:.6f}',
        ]

    def to_dict(self) -> Dict[str, Any]:
        return {
            'instance': self.instance,
            'n_bin': self.n_bin,
            'IT': self.iterations,
            'gap': self.gap,
            'feasible': self.feasible,
            'optimal': self.optimal,
            'qubo_frac': self.qubo_frac,
            'runtime_s': self.runtime_s,
            'objective': self.objective,
            'v_star': self.v_star,
            'extra': dict(self.extra),
        }


@dataclass(frozen=True)
class CampaignSummary:
    """
    汇总行

    Attributes:
        count: 实例数
        mean_iterations: 平均迭代次数
        mean_gap: 平均间隙（没有已知最优值时为 None）
        feasible_pct: 可行率（百分比）
        optimal_pct: 最优率（百分比，没有已知最优值时为 None）
        mean_qubo_frac: 平均 QUBO 最优比例（未检查时为 None）
        runtime_s: 总耗时
    """
    count: int
    mean_iterations: float
    mean_gap: Optional[float]
    feasible_pct: float
    optimal_pct: Optional[float]
    mean_qubo_frac: Optional[float]
    runtime_s: float

    def as_csv_row(self) -> List[Any]:
        return [
            AGGREGATE_LABEL,
            '',
            repr(self.mean_iterations),
            '' if self.mean_gap is None else repr(self.mean_gap),
            repr(self.feasible_pct),
            '' if self.optimal_pct is None else repr(self.optimal_pct),
            '' if self.mean_qubo_frac is None else repr(self.mean_qubo_frac),
            f'{self.runtime_s:.6f}',
        ]


def _mean(values: List[float]) -> Optional[float]:
    return float(np.mean(values)) if values else None


def summarize(rows: Sequence[CampaignRow]) -> CampaignSummary:
    """
    由实例行计算汇总行

    Args:
        rows: 实例行

    Returns:
        汇总（没有实例时各均值为 0 或 None）
    """
    if not rows:
        return CampaignSummary(0, 0.0, None, 0.0, None, None, 0.0)
    gaps = [row.gap for row in rows if row.gap is not None]
    optimal = [row.optimal for row in rows if row.optimal is not None]
    qubo = [row.qubo_frac for row in rows if row.qubo_frac is not None]
    return CampaignSummary(
        count=len(rows),
        mean_iterations=float(np.mean([row.iterations for row in rows])),
        mean_gap=_mean(gaps),
        feasible_pct=100.0 * sum(row.feasible for row in rows) / len(rows),
        optimal_pct=100.0 * sum(optimal) / len(optimal) if optimal else None,
        mean_qubo_frac=_mean(qubo),
        runtime_s=float(sum(row.runtime_s for row in rows)),
    )


@dataclass
class CampaignResult:
    """
    一次批量运行（一个 ADMM 变体）的结果

    Attributes:
        name: 运行名称（bp / misk）
        mode: ADMM 模式
        master_seed: 主种子
        config_hash: 参数摘要
        rows: 按实例序号排列的结果行
    """
    name: str
    mode: AdmmMode
    master_seed: int
    config_hash: str
    rows: List[CampaignRow] = field(default_factory=list)

    @property
    def summary(self) -> CampaignSummary:
        return summarize(self.rows)

    @property
    def label(self) -> str:
        blocks = 3 if self.mode is AdmmMode.THREE_BLOCK else 2
        return f'{self.name}_{blocks}b_seed{self.master_seed}_{self.config_hash}'

    def write_csv(self, path: str) -> None:
        """写出 CSV（最后一行为汇总行）"""
        directory = os.path.dirname(path)
        if directory:
            os.makedirs(directory, exist_ok=True)
        with open(path, 'w', encoding='utf-8', newline='') as f:
            writer = csv.writer(f)
            writer.writerow(CSV_HEADER)
            for row in self.rows:
                writer.writerow(row.as_csv_row())
            writer.writerow(self.summary.as_csv_row())

    def to_dict(self) -> Dict[str, Any]:
        summary = self.summary
        return {
            'name': self.name,
            'mode': self.mode.value,
            'master_seed': self.master_seed,
            'config_hash': self.config_hash,
            'rows': [row.to_dict() for row in self.rows],
            'summary': {
                'count': summary.count,
                'IT': summary.mean_iterations,
                'gap': summary.mean_gap,
                'feasible_pct': summary.feasible_pct,
                'optimal_pct': summary.optimal_pct,
                'qubo_frac': summary.mean_qubo_frac,
                'runtime_s': summary.runtime_s,
            },
        }


@dataclass
class CampaignTask:
    """
    单个实例的求解任务（可跨进程传递）

    Attributes:
        index: 实例全局序号
        instance_id: 实例标识
        instance: 实例
        config: ADMM 参数（种子由任务覆盖）
        seed: 本实例的预言机种子
        oracle_name: 预言机名称
        oracle_params: 预言机参数
        qp_params: QP 求解器参数
        local_search: 是否包装装箱局部搜索（仅 BP）
        compute_gap: 是否计算精确最优值
        qubo_check: 是否检查 QUBO 精确最优比例
    """
    index: int
    instance_id: str
    instance: Instance
    config: AdmmConfig
    seed: int
    oracle_name: str = 'exact'
    oracle_params: Dict[str, Any] = field(default_factory=dict)
    qp_params: Dict[str, Any] = field(default_factory=dict)
    local_search: bool = False
    compute_gap: bool = True
    qubo_check: bool = False


def instance_problem(inst: Instance) -> MboProblem:
    """实例转混合二进制问题"""
    if isinstance(inst, BpInstance):
        return bp_to_mbo(inst)[0]
    return misk_to_mbo(inst)[0]


def reference_value(inst: Instance, problem: MboProblem, qp_solver: QpSolver) -> Optional[float]:
    """
    精确最优值 v*（超过规模上限时为 None）

    Args:
        inst: 实例
        problem: 对应的问题
        qp_solver: QP 求解器

    Returns:
        v*
    """
    if problem.n_bin > EXACT_MAX_BITS:
        return None
    if isinstance(inst, MiskInstance):
        return solve_misk_exact(inst)[1]
    result = exact_mbo_solve(problem, qp_solver)
    return result.value if result.feasible else None


def build_task_oracle(task: CampaignTask) -> IQuboOracle:
    """按任务创建预言机"""
    oracle = get_oracle_factory().create(task.oracle_name, **task.oracle_params)
    if task.local_search:
        if not isinstance(task.instance, BpInstance):
            raise ValueError('局部搜索只适用于装箱实例')
        _, index = bp_to_mbo(task.instance)
        oracle = LocalSearchOracle(oracle, task.instance, index, mu=task.config.mu)
    return oracle


def reported_point(problem: MboProblem, report: SolveReport) -> Tuple[float, bool]:
    """
    计入结果行的 (目标值, 是否可行)

    开启修复且修复后的点可行时取修复后的点，否则取评价值最小的迭代点
    """
    polished = report.polished
    if polished is not None and polished.success and is_feasible(problem, polished.point):
        return problem_objective(problem, polished.point), True
    return report.best_objective, report.best_feasible


def run_task(task: CampaignTask) -> Tuple[CampaignRow, Dict[str, Any]]:
    """
    求解单个实例

    Args:
        task: 任务

    Returns:
        (结果行, 求解报告字典)
    """
    problem = instance_problem(task.instance)
    qp_solver = QpSolver(**task.qp_params)
    track = task.qubo_check and problem.n_bin <= task.config.qubo_check_max_bits
    cfg = task.config.replace(seed=task.seed, track_qubo_optimality=track)
    report = solve(problem, cfg, build_task_oracle(task), qp_solver)

    v_star = reference_value(task.instance, problem, qp_solver) if task.compute_gap else None
    objective, feasible = reported_point(problem, report)
    gap_value = gap(objective, v_star) if v_star is not None else None
    optimal = None
    if gap_value is not None:
        optimal = bool(feasible and gap_value <= OPTIMAL_GAP_TOL)

    extra: Dict[str, Any] = {}
    if isinstance(task.instance, BpInstance):
        extra['ffd_bins'] = first_fit_decreasing(task.instance)[0]
        extra['lower_bound'] = task.instance.lower_bound
    extra['block_seconds'] = dict(report.block_seconds)

    row = CampaignRow(
        instance=task.instance_id,
        n_bin=problem.n_bin,
        iterations=report.iterations,
        gap=gap_value,
        feasible=feasible,
        optimal=optimal,
        qubo_frac=report.qubo_optimal_fraction,
        runtime_s=report.runtime_seconds,
        objective=objective,
        v_star=v_star,
        extra=extra,
    )
    return row, report.to_dict()


def config_hash(cfg: AdmmConfig, oracle_name: str, oracle_params: Dict[str, Any], **extra: Any) -> str:
    """参数摘要（8 位十六进制）"""
    payload = {
        'admm': {key: value for key, value in cfg.to_dict().items() if key != 'seed'},
        'oracle': oracle_name,
        'oracle_params': oracle_params,
        'extra': extra,
    }
    text = json.dumps(payload, sort_keys=True, default=str)
    return hashlib.sha1(text.encode('utf-8')).hexdigest()[:8]


def bp_instances(
    sizes: Sequence[int],
    cap: int,
    count: int,
    master_seed: int
) -> List[Tuple[str, BpInstance]]:
    """
    生成 BP 实例集合

    Args:
        sizes: 物品数列表
        cap: 箱子容量
        count: 每个规模的实例数
        master_seed: 主种子

    Returns:
        (实例标识, 实例) 列表
    """
    instances = []
    for n in sizes:
        for idx in range(count):
            inst = gen_bp(n, cap, instance_seed(master_seed, len(instances)), idx)
            instances.append((inst.name, inst))
    return instances


def misk_instances(
    families: Sequence[int],
    T: int,
    group: int,
    count: int,
    master_seed: int
) -> List[Tuple[str, MiskInstance]]:
    """
    生成 MISK 实例集合

    Args:
        families: 族数列表
        T: 每族物品数
        group: 数据组（1 或 2）
        count: 每个规模的实例数
        master_seed: 主种子

    Returns:
        (实例标识, 实例) 列表
    """
    instances = []
    for K in families:
        for idx in range(count):
            inst = gen_misk(K, T=T, group=group, seed=instance_seed(master_seed, len(instances)), idx=idx)
            instances.append((inst.name, inst))
    return instances


def run_campaign(
    name: str,
    instances: Sequence[Tuple[str, Instance]],
    cfg: AdmmConfig,
    oracle_name: str = 'exact',
    oracle_params: Optional[Dict[str, Any]] = None,
    qp_params: Optional[Dict[str, Any]] = None,
    master_seed: int = 0,
    local_search: bool = False,
    compute_gap: bool = True,
    qubo_check: bool = False,
    workers: int = 1,
    results_dir: Optional[str] = None,
    progress: bool = True
) -> CampaignResult:
    """
    批量求解

    Args:
        name: 运行名称
        instances: (实例标识, 实例) 列表
        cfg: ADMM 参数
        oracle_name: 预言机名称
        oracle_params: 预言机参数
        qp_params: QP 求解器参数
        master_seed: 主种子，实例 i 的预言机种子由 (master_seed, i) 派生
        local_search: 是否包装装箱局部搜索
        compute_gap: 是否计算精确最优值
        qubo_check: 是否检查 QUBO 精确最优比例
        workers: 进程数（1 表示在当前进程运行）
        results_dir: 结果目录（None 表示不写文件）
        progress: 是否显示进度条

    Returns:
        运行结果，行顺序与实例顺序一致
    """
    logger = get_logger()
    oracle_params = dict(oracle_params or {})
    qp_params = dict(qp_params or {})
    digest = config_hash(cfg, oracle_name, oracle_params, local_search=local_search, qp=qp_params)
    result = CampaignResult(name=name, mode=cfg.mode, master_seed=master_seed, config_hash=digest)

    tasks = [
        CampaignTask(
            index=idx,
            instance_id=instance_id,
            instance=inst,
            config=cfg,
            seed=instance_seed(master_seed, idx),
            oracle_name=oracle_name,
            oracle_params=oracle_params,
            qp_params=qp_params,
            local_search=local_search,
            compute_gap=compute_gap,
            qubo_check=qubo_check,
        )
        for idx, (instance_id, inst) in enumerate(instances)
    ]
    logger.info(f'批量运行 {result.label}: {len(tasks)} 个实例, 预言机={oracle_name}, 进程数={workers}')

    outputs: List[Optional[Tuple[CampaignRow, Dict[str, Any]]]] = [None] * len(tasks)
    with tqdm(total=len(tasks), desc=result.label, disable=not progress or not tasks) as bar:
        if workers > 1 and len(tasks) > 1:
            with ProcessPoolExecutor(max_workers=workers) as executor:
                futures = {executor.submit(run_task, task): task.index for task in tasks}
                for future in as_completed(futures):
                    outputs[futures[future]] = future.result()
                    bar.update(1)
        else:
            for task in tasks:
                outputs[task.index] = run_task(task)
                bar.update(1)

    for task, output in zip(tasks, outputs):
        row, report = output
        result.rows.append(row)
        logger.info(
            f'{row.instance}: IT={row.iterations}, 目标={row.objective:.6g}, v*={row.v_star}, '
            f'可行={row.feasible}, 最优={row.optimal}, 耗时={row.runtime_s:.3f}s'
        )
        if results_dir:
            _write_instance_json(results_dir, result, task, row, report)

    if results_dir:
        result.write_csv(os.path.join(results_dir, f'{result.label}.csv'))
    return result


def _write_instance_json(
    results_dir: str,
    result: CampaignResult,
    task: CampaignTask,
    row: CampaignRow,
    report: Dict[str, Any]
) -> None:
    directory = os.path.join(results_dir, result.label)
    os.makedirs(directory, exist_ok=True)
    path = os.path.join(directory, f'{task.instance_id}_seed{task.seed}_{result.config_hash}.json')
    payload = {
        'row': row.to_dict(),
        'instance': task.instance.to_dict(),
        'report': report,
    }
    with open(path, 'w', encoding='utf-8') as f:
        json.dump(payload, f, ensure_ascii=False, indent=2, default=_json_default)


def _json_default(value: Any) -> Any:
    if isinstance(value, np.generic):
        return value.item()
    if isinstance(value, np.ndarray):
        return value.tolist()
    raise TypeError(f'无法序列化: {type(value)}')


def format_summary_table(results: Sequence[CampaignResult]) -> str:
    """
    把各变体的汇总行排成文本表格

    Args:
        results: 运行结果列表

    Returns:
        表格文本
    """
    def fmt(value: Optional[float], pattern: str = '{:.4g}') -> str:
        return '-' if value is None else pattern.format(value)

    lines = [f'{"variant":<32} {"count":>5} {"IT":>8} {"Gap":>10} {"Feas%":>7} {"Opt%":>7} {"QUBO%":>7}']
    for res in results:
        s = res.summary
        qubo_pct = None if s.mean_qubo_frac is None else 100.0 * s.mean_qubo_frac
        lines.append(
            f'{res.label:<32} {s.count:>5} {s.mean_iterations:>8.1f} {fmt(s.mean_gap):>10} '
            f'{s.feasible_pct:>7.1f} {fmt(s.optimal_pct, "{:.1f}"):>7} {fmt(qubo_pct, "{:.1f}"):>7}'
        )
    return '\n'.join(lines)
