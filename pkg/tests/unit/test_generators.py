"""
实例生成器单元测试
"""

import numpy as np
import pytest

from src.data.generators import MISK_UTILIZATION, gen_bp, gen_misk
from src.data.instances import BpInstance, MiskInstance, instance_from_dict
from src.core.errors import InstanceError


pytestmark = pytest.mark.unit


class TestGenBp:
    """测试 BP 生成器"""

    def test_shape_and_range(self):
        inst = gen_bp(20, 40, seed=1, idx=3)
        assert inst.n == inst.m == 20
        assert all(1 <= w <= 40 for w in inst.w)
        assert inst.name == 'N20C40I3'

    def test_reproducible(self):
        assert gen_bp(10, 40, seed=5).w == gen_bp(10, 40, seed=5).w
        assert gen_bp(10, 40, seed=5).w != gen_bp(10, 40, seed=6).w

    def test_invalid_arguments(self):
        with pytest.raises(ValueError):
            gen_bp(0, 40, seed=1)
        with pytest.raises(ValueError):
            gen_bp(3, 0, seed=1)

    def test_lower_bound(self):
        inst = BpInstance(n=3, m=3, cap=40, w=(39, 1, 39))
        assert inst.lower_bound == 2


class TestGenMisk:
    """测试 MISK 生成器"""

    def test_group_one_ranges(self):
        inst = gen_misk(5, T=10, group=1, seed=3, idx=1)
        assert inst.name == 'K5T10G1I1'
        assert np.all((inst.D >= 1) & (inst.D <= 10))
        assert np.all(np.abs(inst.C + inst.D) <= 2.0)
        assert np.all((inst.S >= 40) & (inst.S <= 60))

    def test_group_two_ranges(self):
        inst = gen_misk(5, T=10, group=2, seed=3)
        assert np.all((inst.C >= -60) & (inst.C <= -40))
        assert np.all((inst.S >= 0) & (inst.S <= 1))

    def test_groups_share_consumption(self):
        first = gen_misk(4, group=1, seed=9)
        second = gen_misk(4, group=2, seed=9)
        assert np.array_equal(first.D, second.D)
        assert first.P_cap == second.P_cap

    def test_utilization(self):
        inst = gen_misk(8, seed=2)
        assert inst.utilization == pytest.approx(MISK_UTILIZATION)

    def test_round_capacity(self):
        inst = gen_misk(3, T=2, seed=4, round_capacity=True)
        assert inst.P_cap == float(int(inst.P_cap))
        assert inst.P_cap >= 1

    def test_invalid_group(self):
        with pytest.raises(ValueError):
            gen_misk(2, group=3)


class TestInstanceDicts:
    """测试实例字典"""

    def test_misk_round_trip(self):
        inst = gen_misk(2, T=3, seed=1)
        loaded = instance_from_dict(inst.to_dict())
        assert isinstance(loaded, MiskInstance)
        assert np.array_equal(loaded.C, inst.C)

    def test_unknown_type(self):
        with pytest.raises(InstanceError):
            instance_from_dict({'type': 'tsp'})

    def test_invalid_bp(self):
        with pytest.raises(ValueError):
            BpInstance(n=2, m=2, cap=10, w=(1,))
