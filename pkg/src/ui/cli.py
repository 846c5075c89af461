"""
命令行界面

子命令:
    solve       求解单个实例（JSON 问题、BP/MISK 实例或 Scholl 文件）
    bench-bp    装箱批量实验
    bench-misk  多族背包批量实验
    generate    生成随机实例
    toy         导出内置的小算例
"""

import argparse
import json
import os
from typing import Any, Dict, List, Optional, Sequence, Tuple

from ..core.admm import AdmmConfig, AdmmSolver, write_trace_csv
from ..core.bin_packing import bp_to_mbo, decode_bins
from ..core.campaign import (
    CampaignResult,
    bp_instances,
    format_summary_table,
    instance_problem,
    instance_seed,
    misk_instances,
    run_campaign,
)
from ..core.diagnostics import diagnose
from ..core.errors import ConfigError, MboError, SizeGuardError
from ..core.knapsack import misk_to_mbo
from ..core.problem import AdmmMode, MboProblem
from ..data.generators import MISK_DEFAULT_T, gen_bp, gen_misk
from ..data.instances import BpInstance, MiskInstance, dump_instance
from ..data.toy_problems import TOY_PROBLEMS, get_toy_problem
from ..oracles import LocalSearchOracle, create_oracle, oracle_params
from ..oracles.exact import DEFAULT_MAX_BITS
from ..parsers import dump_problem, load_any, read_scholl, write_scholl
from ..services.qp_solver import QpSolver
from ..utils.config import Config, init_config
from ..utils.logger import get_logger, init_logger_from_config


ORACLE_CHOICES = ['exact', 'sa', 'noisy']


def _add_admm_arguments(parser: argparse.ArgumentParser, multi_blocks: bool) -> None:
    """ADMM 与预言机参数"""
    group = parser.add_argument_group('ADMM')
    if multi_blocks:
        group.add_argument('--blocks', type=int, nargs='+', choices=[2, 3], default=[3],
                           help='ADMM 变体，可同时给出 2 3')
    else:
        group.add_argument('--blocks', type=int, choices=[2, 3], default=None, help='两块或三块 ADMM')
    group.add_argument('--rho-init', type=float, help='ρ 初值')
    group.add_argument('--rho-growth', type=float, help='ρ 每轮倍增因子')
    group.add_argument('--rho-cap', type=float, help='ρ 上限')
    group.add_argument('--rho-fixed', action='store_true', help='固定 ρ')
    group.add_argument('--beta', type=float, help='β 初值')
    group.add_argument('--beta-fixed', action='store_true', help='固定 β')
    group.add_argument('--c', type=float, help='等式约束罚系数')
    group.add_argument('--mu', type=float, help='评价值中违反量的惩罚')
    group.add_argument('--eps', type=float, help='残差终止容差')
    group.add_argument('--max-iter', type=int, help='最大外层迭代次数')
    group.add_argument('--time-limit', type=float, help='时间上限（秒）')
    group.add_argument('--seed', type=int, help='预言机随机种子')
    group.add_argument('--polish', action='store_true', help='结束后修复最优点的连续部分')
    group.add_argument('--qubo-check', action='store_true', help='每轮用精确枚举检查 QUBO 结果')

    oracle = parser.add_argument_group('预言机')
    oracle.add_argument('--oracle', choices=ORACLE_CHOICES, default=None, help='QUBO 预言机')
    oracle.add_argument('--noise-p0', type=float, help='含噪预言机的初始翻转概率')
    oracle.add_argument('--noise-base', choices=['exact', 'sa'], help='含噪预言机包装的基础预言机')
    oracle.add_argument('--sa-sweeps', type=int, help='模拟退火扫描次数')
    oracle.add_argument('--sa-restarts', type=int, help='模拟退火链条数')


def build_parser() -> argparse.ArgumentParser:
    """
    构造参数解析器

    Returns:
        解析器
    """
    parser = argparse.ArgumentParser(prog='mbo-admm', description='混合二进制优化的 ADMM 启发式求解器')
    parser.add_argument('--config', help='配置文件路径')
    parser.add_argument('--log-level', choices=['DEBUG', 'INFO', 'WARNING', 'ERROR'], help='日志级别')
    sub = parser.add_subparsers(dest='command', required=True)

    solve = sub.add_parser('solve', help='求解单个实例')
    solve.add_argument('instance', help='实例文件 (.json / .bpp / .txt)')
    _add_admm_arguments(solve, multi_blocks=False)
    solve.add_argument('--local-search', action='store_true', help='装箱实例: 对 QUBO 结果做局部搜索')
    solve.add_argument('--diagnose', action='store_true', help='打印罚参数诊断')
    solve.add_argument('--trace', metavar='PATH', help='迭代记录 CSV')
    solve.add_argument('--out', metavar='PATH', help='求解报告 JSON')

    bench_bp = sub.add_parser('bench-bp', help='装箱批量实验')
    _add_admm_arguments(bench_bp, multi_blocks=True)
    bench_bp.add_argument('--sizes', type=int, nargs='+', help='物品数列表')
    bench_bp.add_argument('--capacity', type=int, help='箱子容量')
    bench_bp.add_argument('--instances', type=int, help='每个规模的实例数')
    bench_bp.add_argument('--scholl', nargs='+', metavar='FILE', help='改用 Scholl 文件')
    bench_bp.add_argument('--local-search', action='store_true', help='对 QUBO 结果做局部搜索')
    _add_bench_arguments(bench_bp)

    bench_misk = sub.add_parser('bench-misk', help='多族背包批量实验')
    _add_admm_arguments(bench_misk, multi_blocks=True)
    bench_misk.add_argument('--families', type=int, nargs='+', help='族数列表')
    bench_misk.add_argument('--items', type=int, help='每族物品数')
    bench_misk.add_argument('--instances', type=int, help='每个规模的实例数')
    bench_misk.add_argument('--group', type=int, choices=[1, 2], help='数据组')
    _add_bench_arguments(bench_misk)

    generate = sub.add_parser('generate', help='生成随机实例')
    generate.add_argument('kind', choices=['bp', 'misk'])
    generate.add_argument('--n', type=int, default=4, help='BP 物品数')
    generate.add_argument('--cap', type=int, default=40, help='BP 容量')
    generate.add_argument('--K', type=int, default=5, help='MISK 族数')
    generate.add_argument('--T', type=int, default=MISK_DEFAULT_T, help='MISK 每族物品数')
    generate.add_argument('--group', type=int, choices=[1, 2], default=1, help='MISK 数据组')
    generate.add_argument('--count', type=int, default=1, help='实例数')
    generate.add_argument('--master-seed', type=int, default=0, help='主种子')
    generate.add_argument('--format', choices=['json', 'scholl'], default='json', help='BP 输出格式')
    generate.add_argument('--out-dir', default='instances', help='输出目录')

    toy = sub.add_parser('toy', help='导出内置小算例')
    toy.add_argument('name', choices=sorted(TOY_PROBLEMS), help='算例名称')
    toy.add_argument('out', help='输出 JSON 路径')
    return parser


def _add_bench_arguments(parser: argparse.ArgumentParser) -> None:
    group = parser.add_argument_group('批量运行')
    group.add_argument('--workers', type=int, help='进程数')
    group.add_argument('--results-dir', help='结果目录')
    group.add_argument('--master-seed', type=int, help='主种子')
    group.add_argument('--no-progress', action='store_true', help='不显示进度条')


def admm_config_from_args(args: argparse.Namespace, config: Config, blocks: Optional[int]) -> AdmmConfig:
    """
    配置文件参数加命令行覆盖

    Args:
        args: 命令行参数
        config: 配置管理器
        blocks: ADMM 块数（None 表示沿用配置）

    Returns:
        ADMM 参数
    """
    return AdmmConfig.from_config(
        config,
        mode=AdmmMode.from_blocks(blocks) if blocks is not None else None,
        rho_init=args.rho_init,
        rho_growth=args.rho_growth,
        rho_cap=args.rho_cap,
        rho_fixed=True if args.rho_fixed else None,
        beta_init=args.beta,
        beta_fixed=True if args.beta_fixed else None,
        c=args.c,
        mu=args.mu,
        eps=args.eps,
        max_iter=args.max_iter,
        time_limit=args.time_limit,
        seed=args.seed,
        polish=True if args.polish else None,
        track_qubo_optimality=True if args.qubo_check else None,
    )


def oracle_choice_from_args(args: argparse.Namespace, config: Config) -> Tuple[str, Dict[str, Any]]:
    """
    预言机名称与参数

    Args:
        args: 命令行参数
        config: 配置管理器

    Returns:
        (名称, 工厂参数)
    """
    name = args.oracle or config.get('oracles.default', 'exact')
    overrides: Dict[str, Any] = {}
    base = None
    if name == 'noisy':
        base = args.noise_base or config.get('oracles.noisy.base', 'exact')
        overrides.update(p0=args.noise_p0, base=base)
    if name == 'sa' or base == 'sa':
        overrides.update(sweeps=args.sa_sweeps, restarts=args.sa_restarts)
    return name, oracle_params(name, config, **overrides)


def _exact_guard(name: str, params: Dict[str, Any]) -> Optional[int]:
    """使用精确枚举时的比特数上限"""
    if name == 'exact' or (name == 'noisy' and params.get('base', 'exact') == 'exact'):
        return int(params.get('max_bits', DEFAULT_MAX_BITS))
    return None


def _as_problem(instance: Any) -> Tuple[MboProblem, Any]:
    """实例转问题，同时返回 BP 下标映射（其他实例为 None）"""
    if isinstance(instance, MboProblem):
        return instance, None
    if isinstance(instance, BpInstance):
        return bp_to_mbo(instance)
    if isinstance(instance, MiskInstance):
        return misk_to_mbo(instance)[0], None
    raise ConfigError(f'无法求解的实例类型: {type(instance).__name__}')


def _write_json(path: str, payload: Dict[str, Any]) -> None:
    directory = os.path.dirname(path)
    if directory:
        os.makedirs(directory, exist_ok=True)
    with open(path, 'w', encoding='utf-8') as f:
        json.dump(payload, f, ensure_ascii=False, indent=2)


def cmd_solve(args: argparse.Namespace, config: Config) -> int:
    """solve 子命令"""
    logger = get_logger()
    instance = load_any(args.instance)
    problem, index = _as_problem(instance)
    cfg = admm_config_from_args(args, config, args.blocks)
    name, params = oracle_choice_from_args(args, config)
    oracle = create_oracle(name, **params)
    if args.local_search:
        if index is None:
            raise ConfigError('--local-search 只适用于装箱实例')
        oracle = LocalSearchOracle(oracle, instance, index, mu=cfg.mu)

    if args.diagnose:
        for item in diagnose(problem, cfg).items:
            print(f'[{item.level.value}] {item.code}: {item.message}')

    solver = AdmmSolver(cfg, oracle, QpSolver.from_config(config))
    report = solver.solve(problem)

    if args.trace:
        write_trace_csv(report.trace, args.trace)
        logger.info(f'迭代记录已写入 {args.trace}')
    if args.out:
        _write_json(args.out, report.to_dict())
        logger.info(f'求解报告已写入 {args.out}')

    best = report.best_point
    print(f'x = {best.x.astype(int).tolist()}')
    if problem.n_cont:
        print(f'u = {[round(float(v), 6) for v in best.u]}')
    print(f'目标值 = {report.best_objective:.6g}, 评价值 = {report.best_merit:.6g}, 可行 = {report.best_feasible}')
    print(f'迭代 = {report.iterations} (最优在第 {report.best_iteration} 轮), 终止原因 = {report.termination_reason.value}')
    if isinstance(instance, BpInstance) and report.best_feasible:
        bins = [items for items in decode_bins(instance, best.x, index) if items]
        print(f'箱子 = {bins}')
    if report.polished is not None:
        print(f'修复 = {report.polished.status}')
    return 0


def _run_variants(
    name: str,
    instances: Sequence[Tuple[str, Any]],
    args: argparse.Namespace,
    config: Config,
    local_search: bool = False
) -> List[CampaignResult]:
    """按 --blocks 给出的每个变体运行一次批量实验"""
    oracle_name, params = oracle_choice_from_args(args, config)
    guard = _exact_guard(oracle_name, params)
    if guard is not None:
        for instance_id, inst in instances:
            n_bin = instance_problem(inst).n_bin
            if n_bin > guard:
                raise SizeGuardError(f'{instance_id}: n_bin={n_bin} 超过精确预言机上限 {guard}，请改用 --oracle sa')

    bench = config.section('bench')
    workers = args.workers if args.workers is not None else int(bench.get('workers', 1))
    results_dir = args.results_dir or bench.get('results_dir')
    master_seed = args.master_seed if args.master_seed is not None else int(bench.get('master_seed', 0))
    results = []
    for blocks in dict.fromkeys(args.blocks):
        cfg = admm_config_from_args(args, config, blocks)
        results.append(run_campaign(
            name,
            instances,
            cfg,
            oracle_name=oracle_name,
            oracle_params=params,
            qp_params=config.section('qp'),
            master_seed=master_seed,
            local_search=local_search,
            qubo_check=cfg.track_qubo_optimality,
            workers=workers,
            results_dir=results_dir,
            progress=not args.no_progress,
        ))
    print(format_summary_table(results))
    return results


def cmd_bench_bp(args: argparse.Namespace, config: Config) -> int:
    """bench-bp 子命令"""
    bench = config.section('bench.bp')
    master_seed = args.master_seed if args.master_seed is not None else int(config.get('bench.master_seed', 0))
    if args.scholl:
        instances = [(os.path.splitext(os.path.basename(path))[0], read_scholl(path)) for path in args.scholl]
    else:
        instances = bp_instances(
            sizes=args.sizes or bench.get('sizes', [2, 3, 4]),
            cap=args.capacity or int(bench.get('capacity', 40)),
            count=args.instances if args.instances is not None else int(bench.get('instances_per_size', 20)),
            master_seed=master_seed,
        )
    _run_variants('bp', instances, args, config, local_search=args.local_search)
    return 0


def cmd_bench_misk(args: argparse.Namespace, config: Config) -> int:
    """bench-misk 子命令"""
    bench = config.section('bench.misk')
    master_seed = args.master_seed if args.master_seed is not None else int(config.get('bench.master_seed', 0))
    group = args.group or int(bench.get('group', 1))
    if group not in (1, 2):
        raise ConfigError(f'数据组只能是 1 或 2: {group}')
    instances = misk_instances(
        families=args.families or bench.get('families', [5, 8, 11, 14]),
        T=args.items or int(bench.get('items_per_family', MISK_DEFAULT_T)),
        group=group,
        count=args.instances if args.instances is not None else int(bench.get('instances_per_size', 3)),
        master_seed=master_seed,
    )
    _run_variants(f'misk_g{group}', instances, args, config)
    return 0


def cmd_generate(args: argparse.Namespace, config: Config) -> int:
    """generate 子命令"""
    os.makedirs(args.out_dir, exist_ok=True)
    for idx in range(args.count):
        seed = instance_seed(args.master_seed, idx)
        if args.kind == 'bp':
            inst = gen_bp(args.n, args.cap, seed, idx)
            if args.format == 'scholl':
                path = os.path.join(args.out_dir, f'{inst.name}.bpp')
                write_scholl(inst, path)
            else:
                path = os.path.join(args.out_dir, f'{inst.name}.json')
                dump_instance(inst, path)
        else:
            inst = gen_misk(args.K, T=args.T, group=args.group, seed=seed, idx=idx)
            path = os.path.join(args.out_dir, f'{inst.name}.json')
            dump_instance(inst, path)
        print(path)
    return 0


def cmd_toy(args: argparse.Namespace, config: Config) -> int:
    """toy 子命令"""
    dump_problem(get_toy_problem(args.name), args.out)
    print(args.out)
    return 0


COMMANDS = {
    'solve': cmd_solve,
    'bench-bp': cmd_bench_bp,
    'bench-misk': cmd_bench_misk,
    'generate': cmd_generate,
    'toy': cmd_toy,
}


def run(argv: Optional[Sequence[str]] = None, config: Optional[Config] = None) -> int:
    """
    解析参数并执行子命令

    Args:
        argv: 命令行参数（None 表示 sys.argv）
        config: 配置管理器（None 表示按 --config 加载）

    Returns:
        退出码: 0 完成，1 输入/约定错误，2 用法错误
    """
    parser = build_parser()
    args = parser.parse_args(argv)

    if config is None:
        config = init_config(args.config)
    if args.log_level:
        config.set('logging.level', args.log_level)
    logger = init_logger_from_config(config)
    for message in config.load_errors:
        logger.warning(message)

    try:
        return COMMANDS[args.command](args, config)
    except ConfigError as e:
        logger.debug('参数错误', exc_info=True)
        parser.print_usage()
        print(f'mbo-admm: 参数错误: {e}')
        return 2
    except (MboError, OSError, ValueError) as e:
        logger.debug('执行失败', exc_info=True)
        logger.error(f'{args.command} 失败: {e}')
        return 1
