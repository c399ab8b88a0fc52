import numpy as np
import pytest

from menusize.core import Menu, revenue_exact
from menusize.dist import JointDist, ProductDist, SingleDist, expand
from menusize.errors import GuardExceeded
from menusize.myerson import myerson_price
from menusize.oracle import LpStatus, opt_menu_lp, rev_opt
from menusize.experiments import uniform01
from corpus import random_joint, random_single


def test_point_mass_extracts_everything():
    sol = opt_menu_lp(JointDist.point([2.0, 3.0, 0.5]))
    assert sol.status is LpStatus.OPTIMAL
    assert abs(sol.objective - 5.5) < 1e-6
    assert abs(sol.menu.prices.max() - 5.5) < 1e-6


def test_small_examples():
    assert abs(rev_opt(expand(uniform01(1))) - 0.5) < 1e-6
    assert abs(rev_opt(expand(uniform01(2))) - 1.0) < 1e-6
    assert abs(rev_opt(uniform01(2)) - 1.0) < 1e-6


def test_guard():
    with pytest.raises(GuardExceeded):
        opt_menu_lp(random_joint(np.random.default_rng(0), 2, max_types=40), guard=1)


def test_self_consistency_and_nonnegative_prices():
    rng = np.random.default_rng(21)
    for _ in range(60):
        F = random_joint(rng, int(rng.integers(1, 4)))
        sol = opt_menu_lp(F)
        assert sol.status is LpStatus.OPTIMAL
        assert np.all(sol.menu.prices >= 0)
        assert abs(revenue_exact(sol.menu, F) - sol.objective) <= 1e-6


def test_single_item_agreement():
    rng = np.random.default_rng(22)
    for _ in range(50):
        d = random_single(rng)
        J = expand(ProductDist((d,)))
        assert abs(rev_opt(J) - myerson_price(d).revenue) <= 1e-6


def test_dominates_other_menus():
    rng = np.random.default_rng(23)
    for _ in range(30):
        F = random_joint(rng, 2, max_types=15)
        best = rev_opt(F)
        for _ in range(5):
            k = int(rng.integers(1, 5))
            M = Menu.from_arrays(rng.random((k, 2)), rng.uniform(0, 10, k))
            assert revenue_exact(M, F) <= best + 1e-6
