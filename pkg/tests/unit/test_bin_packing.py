"""
装箱问题模块单元测试
"""

import numpy as np
import pytest

from src.core.bin_packing import (
    DEFAULT_MU,
    BpIndexMap,
    assignment_merit,
    bp_to_mbo,
    capacity_violation,
    decode_bins,
    first_fit_decreasing,
    karmarkar_karp_split,
    kk_local_search,
    repair_assignment,
)
from src.core.errors import InstanceError
from src.core.problem import MboPoint, is_feasible, objective
from src.data.generators import gen_bp
from src.data.instances import BpInstance


pytestmark = pytest.mark.unit


class TestBpIndexMap:
    """测试变量下标映射"""

    def test_counts(self):
        index = BpIndexMap(n=3, m=3, l=2)
        assert index.n_xi == 6
        assert index.n_chi == 1
        assert index.n_bin == 7

    def test_positions(self):
        index = BpIndexMap(n=3, m=3, l=2)
        assert index.xi(0, 1) == 0
        assert index.xi(2, 2) == 5
        assert index.chi(2) == 6

    def test_fixed_variables_rejected(self):
        index = BpIndexMap(n=3, m=3, l=2)
        with pytest.raises(IndexError):
            index.xi(0, 0)
        with pytest.raises(IndexError):
            index.chi(1)

    def test_decode_fixes_first_item(self):
        index = BpIndexMap(n=3, m=3, l=2)
        bits = index.encode([0, 2, 1], [1, 1, 1])
        assign, used = index.decode(bits)
        assert assign[:, 0].tolist() == [1, 0, 0]
        assert assign[:, 1].tolist() == [0, 0, 1]
        assert assign[:, 2].tolist() == [0, 1, 0]
        assert used.tolist() == [1, 1, 1]

    def test_first_item_must_be_in_first_bin(self):
        with pytest.raises(ValueError):
            BpIndexMap(n=2, m=2, l=1).encode([1, 0], [1, 1])


class TestBpToMbo:
    """测试装箱问题的混合二进制表述"""

    def test_two_items_share_a_bin(self):
        inst = BpInstance(n=2, m=2, cap=40, w=(20, 20))
        p, index = bp_to_mbo(inst)
        assert p.n_bin == 3
        assert p.n_cont == 0
        bits = index.encode([0, 0], [1, 0])
        pt = MboPoint(x=bits)
        assert is_feasible(p, pt)
        assert objective(p, pt) == pytest.approx(1.0)

    def test_overloaded_bin_infeasible(self):
        inst = BpInstance(n=3, m=3, cap=40, w=(39, 1, 39))
        p, index = bp_to_mbo(inst)
        pt = MboPoint(x=index.encode([0, 1, 0], [1, 1, 0]))
        assert not is_feasible(p, pt)

    def test_objective_counts_bins(self):
        inst = BpInstance(n=3, m=3, cap=40, w=(39, 1, 39))
        p, index = bp_to_mbo(inst)
        assert objective(p, MboPoint(x=index.encode([0, 1, 2], [1, 1, 1]))) == pytest.approx(3.0)

    def test_oversized_item(self):
        with pytest.raises(InstanceError):
            bp_to_mbo(BpInstance(n=2, m=2, cap=10, w=(11, 1)))

    def test_single_item_single_bin(self):
        with pytest.raises(InstanceError):
            bp_to_mbo(BpInstance(n=1, m=1, cap=10, w=(5,)))


class TestKarmarkarKarp:
    """测试差分法与局部搜索"""

    def test_split(self):
        heavy, light = karmarkar_karp_split([39, 1, 39], [0, 1, 2])
        assert sorted(heavy) == [1, 2]
        assert light == [0]

    def test_split_empty(self):
        assert karmarkar_karp_split([], []) == ([], [])

    def test_local_search_rebalances(self):
        inst = BpInstance(n=3, m=3, cap=40, w=(39, 1, 39))
        index = BpIndexMap(n=3, m=3, l=inst.lower_bound)
        start = index.encode([0, 1, 0], [1, 1, 0])
        improved = kk_local_search(inst, start, index)
        assert decode_bins(inst, improved, index) == [[0], [1, 2], []]
        p, _ = bp_to_mbo(inst)
        assert is_feasible(p, MboPoint(x=improved))

    def test_local_search_never_worse(self):
        inst = gen_bp(6, 40, seed=5)
        p, index = bp_to_mbo(inst)
        rng = np.random.default_rng(1)
        for _ in range(10):
            bits = rng.integers(0, 2, size=index.n_bin)
            start = repair_assignment(inst, index.decode(bits)[0])
            start_used = np.zeros(inst.m, dtype=int)
            start_used[np.unique(start)] = 1
            start_used[:index.l] = 1

            improved = kk_local_search(inst, bits, index)
            assign, used = index.decode(improved)
            assert np.all(assign.sum(axis=0) == 1)
            owner = np.argmax(assign, axis=0)
            before = assignment_merit(inst, start, start_used, DEFAULT_MU)
            assert assignment_merit(inst, owner, used, DEFAULT_MU) <= before


class TestHeuristics:
    """测试修复与首次适应递减法"""

    def test_repair(self):
        inst = BpInstance(n=3, m=2, cap=10, w=(4, 4, 4))
        assign = np.array([[1, 1, 0], [0, 1, 0]])
        owner = repair_assignment(inst, assign)
        assert owner.tolist() == [0, 0, 1]

    def test_capacity_violation(self):
        inst = BpInstance(n=3, m=2, cap=10, w=(6, 6, 2))
        assert capacity_violation(inst, [0, 0, 1], [1, 1]) == pytest.approx(2.0)
        assert capacity_violation(inst, [0, 1, 1], [1, 0]) == pytest.approx(8.0)

    def test_first_fit_decreasing(self):
        inst = BpInstance(n=5, m=5, cap=10, w=(7, 5, 4, 3, 1))
        bins, owner = first_fit_decreasing(inst)
        assert bins == 2
        assert owner.tolist() == [0, 1, 1, 0, 1]

    def test_ffd_respects_lower_bound(self):
        inst = gen_bp(20, 40, seed=3)
        bins, _ = first_fit_decreasing(inst)
        assert inst.lower_bound <= bins <= inst.n
