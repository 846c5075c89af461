"""
多族背包模块单元测试
"""

import numpy as np
import pytest

from src.core.knapsack import MiskIndexMap, fractional_fill, misk_to_mbo, solve_misk_exact
from src.core.problem import MboPoint, is_feasible, objective
from src.data.generators import gen_misk
from src.data.instances import MiskInstance


pytestmark = pytest.mark.unit


def single_item() -> MiskInstance:
    return MiskInstance(K=1, T=1, P_cap=5.0, S=[1.0], C=[[-10.0]], D=[[5.0]])


class TestMiskToMbo:
    """测试混合二进制表述"""

    def test_dimensions(self):
        inst = gen_misk(2, T=3, seed=1)
        p, index = misk_to_mbo(inst)
        assert p.n_bin == 2
        assert p.n_cont == 6
        assert p.h_l.shape == (7,)
        assert index.xi(1, 2) == 5

    def test_index_out_of_range(self):
        with pytest.raises(IndexError):
            MiskIndexMap(K=2, T=3).xi(2, 0)

    def test_objective_of_filled_point(self):
        p, _ = misk_to_mbo(single_item())
        pt = MboPoint(x=[1], u=[1.0])
        assert is_feasible(p, pt)
        assert objective(p, pt) == pytest.approx(-9.0)

    def test_item_requires_family(self):
        p, _ = misk_to_mbo(single_item())
        assert not is_feasible(p, MboPoint(x=[0], u=[0.5]))

    def test_decode(self):
        inst = gen_misk(2, T=2, seed=4)
        _, index = misk_to_mbo(inst)
        chi, xi = index.decode(MboPoint(x=[1, 0], u=[0.5, 1.0, 0.0, 0.0]))
        assert chi.tolist() == [1.0, 0.0]
        assert xi.tolist() == [[0.5, 1.0], [0.0, 0.0]]


class TestFractionalFill:
    """测试分数背包贪心"""

    def test_fill_by_ratio(self):
        inst = MiskInstance(K=1, T=2, P_cap=6.0, S=[0.0], C=[[-10.0, -4.0]], D=[[5.0, 2.0]])
        xi, value = fractional_fill(inst, [1])
        assert xi.tolist() == [[1.0, 0.5]]
        assert value == pytest.approx(-12.0)

    def test_no_family_enabled(self):
        xi, value = fractional_fill(single_item(), [0])
        assert value == 0.0
        assert not xi.any()

    def test_capacity_respected(self):
        inst = gen_misk(3, T=5, seed=8)
        xi, _ = fractional_fill(inst, [1, 1, 1])
        assert float((inst.D * xi).sum()) <= inst.P_cap + 1e-9
        assert np.all((xi >= 0) & (xi <= 1))


class TestSolveMiskExact:
    """测试 MISK 精确解"""

    def test_single_item(self):
        point, value = solve_misk_exact(single_item())
        assert value == pytest.approx(-9.0)
        assert point.x.tolist() == [1]
        assert point.u.tolist() == [1.0]

    def test_not_worth_opening(self):
        inst = MiskInstance(K=1, T=1, P_cap=5.0, S=[20.0], C=[[-10.0]], D=[[5.0]])
        point, value = solve_misk_exact(inst)
        assert value == 0.0
        assert point.x.tolist() == [0]

    @pytest.mark.parametrize('group', [1, 2])
    def test_optimum_is_feasible(self, group):
        inst = gen_misk(3, T=4, group=group, seed=11)
        p, _ = misk_to_mbo(inst)
        point, value = solve_misk_exact(inst)
        assert value <= 0.0
        assert is_feasible(p, point, tol=1e-9)
        assert objective(p, point) == pytest.approx(value, abs=1e-9)
