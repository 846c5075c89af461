"""
装箱问题模块

把 BP 实例写成混合二进制问题，并提供解码、修复与 Karmarkar-Karp 局部搜索

变量约简:
    物品 0 固定放入箱子 0（整列 ξ_{i,0} 取常数），
    前 l = ⌈Σw / cap⌉ 个箱子的 χ 固定为 1（计入目标常数）。
变量顺序: 先 ξ_{ij}（i 为箱子、j ≥ 1 为物品，按箱子优先），再 χ_i（i ≥ l）。
"""

import heapq
from dataclasses import dataclass
from typing import List, Optional, Tuple

import numpy as np

from .errors import InstanceError
from .problem import MboProblem
from ..data.instances import BpInstance


# 局部搜索中评价值的默认违反量惩罚
DEFAULT_MU = 1e3


@dataclass(frozen=True)
class BpIndexMap:
    """
    BP 变量下标映射

    Attributes:
        n: 物品数
        m: 箱子数
        l: 固定启用的箱子数
    """
    n: int
    m: int
    l: int

    @property
    def n_xi(self) -> int:
        """ξ 变量个数"""
        return self.m * (self.n - 1)

    @property
    def n_chi(self) -> int:
        """χ 变量个数"""
        return self.m - self.l

    @property
    def n_bin(self) -> int:
        """二进制变量总数"""
        return self.n_xi + self.n_chi

    def xi(self, i: int, j: int) -> int:
        """ξ_{ij} 的下标（j ≥ 1）"""
        if not 1 <= j < self.n or not 0 <= i < self.m:
            raise IndexError(f'ξ({i}, {j}) 不是决策变量')
        return i * (self.n - 1) + (j - 1)

    def chi(self, i: int) -> int:
        """χ_i 的下标（i ≥ l）"""
        if not self.l <= i < self.m:
            raise IndexError(f'χ({i}) 不是决策变量')
        return self.n_xi + (i - self.l)

    def decode(self, bits: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
        """
        比特串解码为完整的分配矩阵与箱子启用向量

        Args:
            bits: 二进制变量

        Returns:
            (assign: (m, n) 0/1 矩阵, used: (m,) 0/1 向量)
        """
        bits = np.asarray(bits).astype(int)
        if bits.shape != (self.n_bin,):
            raise ValueError(f'比特串长度应为 {self.n_bin}，实际为 {bits.shape}')
        assign = np.zeros((self.m, self.n), dtype=int)
        assign[0, 0] = 1
        if self.n > 1:
            assign[:, 1:] = bits[:self.n_xi].reshape(self.m, self.n - 1)
        used = np.ones(self.m, dtype=int)
        used[self.l:] = bits[self.n_xi:]
        return assign, used

    def encode(self, bin_of_item: np.ndarray, used: np.ndarray) -> np.ndarray:
        """
        由物品所在箱子与箱子启用向量编码比特串

        Args:
            bin_of_item: (n,) 每个物品所在箱子（物品 0 必须在箱子 0）
            used: (m,) 0/1 启用向量

        Returns:
            比特串
        """
        bin_of_item = np.asarray(bin_of_item, dtype=int)
        if bin_of_item[0] != 0:
            raise ValueError('物品 0 必须位于箱子 0')
        bits = np.zeros(self.n_bin, dtype=np.int8)
        for j in range(1, self.n):
            bits[self.xi(int(bin_of_item[j]), j)] = 1
        bits[self.n_xi:] = np.asarray(used, dtype=np.int8)[self.l:]
        return bits


def bp_to_mbo(inst: BpInstance) -> Tuple[MboProblem, BpIndexMap]:
    """
    BP 实例转混合二进制问题

    目标 Σχ（固定部分计入常数 c_u），等式 Σ_i ξ_ij = 1（j ≥ 1），
    容量 Σ_j w_j ξ_ij - cap·χ_i ≤ 0（固定量移到右端）

    Args:
        inst: BP 实例

    Returns:
        (问题, 下标映射)
    """
    oversized = inst.oversized_items
    if oversized:
        raise InstanceError(f'物品重量超过容量，实例不可行: {oversized}')
    l = inst.lower_bound
    if l > inst.m:
        raise InstanceError(f'下界 l={l} 超过箱子数 m={inst.m}，实例不可行')
    index = BpIndexMap(n=inst.n, m=inst.m, l=l)
    n_bin = index.n_bin
    if n_bin < 1:
        raise InstanceError('实例没有决策变量（只有一个物品且只有一个箱子）')

    w = inst.weights
    a = np.zeros(n_bin)
    a[index.n_xi:] = 1.0

    G_eq = np.zeros((inst.n - 1, n_bin))
    for j in range(1, inst.n):
        for i in range(inst.m):
            G_eq[j - 1, index.xi(i, j)] = 1.0
    b_eq = np.ones(inst.n - 1)

    G_in = np.zeros((inst.m, n_bin))
    h_in = np.zeros(inst.m)
    for i in range(inst.m):
        for j in range(1, inst.n):
            G_in[i, index.xi(i, j)] = w[j]
        if i < l:
            h_in[i] = inst.cap
        else:
            G_in[i, index.chi(i)] = -inst.cap
    h_in[0] -= w[0]

    problem = MboProblem.build(
        Q=np.zeros((n_bin, n_bin)),
        a=a,
        c_u=float(l),
        G_eq=G_eq,
        b_eq=b_eq,
        G_in=G_in,
        h_in=h_in,
        n_cont=0,
    )
    return problem, index


def capacity_violation(inst: BpInstance, bin_of_item: np.ndarray, used: np.ndarray) -> float:
    """容量违反量 Σ_i max(load_i - cap·χ_i, 0)"""
    loads = np.bincount(np.asarray(bin_of_item, dtype=int), weights=inst.weights, minlength=inst.m)
    return float(np.sum(np.maximum(loads - inst.cap * np.asarray(used, dtype=float), 0.0)))


def assignment_merit(inst: BpInstance, bin_of_item: np.ndarray, used: np.ndarray, mu: float) -> float:
    """每个物品恰好放入一个箱子时的评价值 Σχ + μ·容量违反量"""
    return float(np.sum(used)) + mu * capacity_violation(inst, bin_of_item, used)


def repair_assignment(inst: BpInstance, assign: np.ndarray) -> np.ndarray:
    """
    修复分配矩阵，使每个物品恰好属于一个箱子

    多次分配的物品保留下标最小的箱子；未分配的物品按下标顺序放入
    第一个剩余容量足够的箱子，否则放入负载最小的箱子

    Args:
        inst: BP 实例
        assign: (m, n) 0/1 矩阵

    Returns:
        (n,) 每个物品所在箱子
    """
    w = inst.weights
    bin_of_item = np.full(inst.n, -1, dtype=int)
    for j in range(inst.n):
        rows = np.flatnonzero(assign[:, j])
        if rows.size:
            bin_of_item[j] = int(rows[0])
    bin_of_item[0] = 0

    loads = np.zeros(inst.m)
    for j in np.flatnonzero(bin_of_item >= 0):
        loads[bin_of_item[j]] += w[j]
    for j in np.flatnonzero(bin_of_item < 0):
        fits = np.flatnonzero(inst.cap - loads >= w[j])
        target = int(fits[0]) if fits.size else int(np.argmin(loads))
        bin_of_item[j] = target
        loads[target] += w[j]
    return bin_of_item


def karmarkar_karp_split(weights: List[float], labels: List[int]) -> Tuple[List[int], List[int]]:
    """
    Karmarkar-Karp 差分法把物品分成两组，使两组重量差尽量小

    Args:
        weights: 物品重量
        labels: 物品标识（与重量一一对应）

    Returns:
        (较重的一组, 较轻的一组)
    """
    if not labels:
        return [], []
    heap = []
    for order, (weight, label) in enumerate(zip(weights, labels)):
        heapq.heappush(heap, (-float(weight), order, [label], []))
    counter = len(heap)
    while len(heap) > 1:
        d1, _, heavy1, light1 = heapq.heappop(heap)
        d2, _, heavy2, light2 = heapq.heappop(heap)
        # 差值较大的一组放一边，较小的一组反向合并
        heapq.heappush(heap, (d1 - d2, counter, heavy1 + light2, light1 + heavy2))
        counter += 1
    _, _, heavy, light = heap[0]
    return heavy, light


def _orient(
    inst: BpInstance,
    first: int,
    second: int,
    part_a: List[int],
    part_b: List[int]
) -> Tuple[List[int], List[int]]:
    """决定两组物品分别进入哪个箱子：物品 0 留在箱子 0，否则较重组进入下标小的箱子"""
    if 0 in part_b:
        return part_b, part_a
    if 0 in part_a:
        return part_a, part_b
    w = inst.weights
    if sum(w[j] for j in part_b) > sum(w[j] for j in part_a):
        return part_b, part_a
    return part_a, part_b


def kk_local_search(
    inst: BpInstance,
    bits: np.ndarray,
    index: BpIndexMap,
    mu: float = DEFAULT_MU
) -> np.ndarray:
    """
    基于 Karmarkar-Karp 差分的局部搜索

    先修复分配并令 χ 等于实际使用的箱子；然后按下标递增遍历已使用箱子对，
    把两箱物品合并后用 KK 重新二分。容量违反量严格下降且评价值不升，
    或违反量不变而评价值严格下降时接受。

    Args:
        inst: BP 实例
        bits: 二进制变量
        index: 下标映射
        mu: 违反量惩罚

    Returns:
        改进后的比特串
    """
    assign, _ = index.decode(bits)
    bin_of_item = repair_assignment(inst, assign)
    w = inst.weights

    def used_bins(owner: np.ndarray) -> np.ndarray:
        used = np.zeros(inst.m, dtype=int)
        used[np.unique(owner)] = 1
        used[:index.l] = 1
        return used

    used = used_bins(bin_of_item)
    violation = capacity_violation(inst, bin_of_item, used)
    merit_value = assignment_merit(inst, bin_of_item, used, mu)

    occupied = sorted(int(i) for i in np.unique(bin_of_item))
    for pos, first in enumerate(occupied):
        for second in occupied[pos + 1:]:
            pooled = [int(j) for j in np.flatnonzero((bin_of_item == first) | (bin_of_item == second))]
            if not np.any(bin_of_item == first) or not np.any(bin_of_item == second):
                continue
            heavy, light = karmarkar_karp_split([w[j] for j in pooled], pooled)
            to_first, to_second = _orient(inst, first, second, heavy, light)
            candidate = bin_of_item.copy()
            candidate[to_first] = first
            candidate[to_second] = second
            candidate_used = used_bins(candidate)
            candidate_violation = capacity_violation(inst, candidate, candidate_used)
            candidate_merit = assignment_merit(inst, candidate, candidate_used, mu)
            better = (
                (candidate_violation < violation and candidate_merit <= merit_value)
                or (candidate_violation == violation and candidate_merit < merit_value)
            )
            if better:
                bin_of_item = candidate
                used = candidate_used
                violation = candidate_violation
                merit_value = candidate_merit

    return index.encode(bin_of_item, used)


def first_fit_decreasing(inst: BpInstance) -> Tuple[int, np.ndarray]:
    """
    首次适应递减法

    Args:
        inst: BP 实例

    Returns:
        (使用的箱子数, 每个物品所在箱子)
    """
    order = sorted(range(inst.n), key=lambda j: (-inst.w[j], j))
    loads: List[float] = []
    bin_of_item = np.zeros(inst.n, dtype=int)
    for j in order:
        for i, load in enumerate(loads):
            if load + inst.w[j] <= inst.cap:
                loads[i] += inst.w[j]
                bin_of_item[j] = i
                break
        else:
            loads.append(float(inst.w[j]))
            bin_of_item[j] = len(loads) - 1
    return len(loads), bin_of_item


def decode_bins(inst: BpInstance, bits: np.ndarray, index: Optional[BpIndexMap] = None) -> List[List[int]]:
    """
    把可行比特串解码为每个箱子的物品列表

    Args:
        inst: BP 实例
        bits: 二进制变量
        index: 下标映射（缺省时按实例计算）

    Returns:
        长度为 m 的列表，第 i 项为箱子 i 中的物品
    """
    index = index or BpIndexMap(n=inst.n, m=inst.m, l=inst.lower_bound)
    assign, _ = index.decode(bits)
    return [[int(j) for j in np.flatnonzero(assign[i])] for i in range(inst.m)]
