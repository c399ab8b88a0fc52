import math

import numpy as np
import pytest

from menusize.core import Menu, separate_sale_menu
from menusize.dist import JointDist, expand
from menusize.errors import GuardExceeded, NonMonotoneAllocation
from menusize.experiments import (allocation_curve, bundle_price_curve, cc_deterministic,
                                  check_sum_rev, decode_entry, encode_entry, full_price_stats,
                                  simulate_public_coin, uniform01)
from menusize.myerson import srev, posted_price_menu
from menusize.srev import CompoundMenu
from corpus import random_joint


def test_uniform01():
    F = uniform01(1)
    assert np.array_equal(F.items[0].values, [0.0, 1.0])
    assert srev(uniform01(7)) == 3.5
    J = expand(uniform01(3))
    assert len(J) == 8 and np.allclose(J.probs, 1 / 8)


def test_full_price_examples():
    n = 6
    s = full_price_stats(separate_sale_menu([1.0] * n), n)
    assert (s.fraction_full_price, s.revenue, s.welfare) == (1.0, 3.0, 3.0)
    z = full_price_stats(Menu.zero(n), n)
    assert z.fraction_full_price == 2.0**-n and z.revenue == 0.0
    comp = CompoundMenu(n, tuple(((i,), posted_price_menu(1.0)) for i in range(n)))
    assert full_price_stats(comp, n) == s


def test_full_price_grand_bundle_matches_binomial():
    n = 16
    q = n / 2 - math.sqrt(n)
    s = full_price_stats(Menu.from_arrays(np.ones((1, n)), [q]), n)
    # a type pays q when |S| >= q; it pays full price iff q > |S| - 1/2, i.e. |S| < q + 1/2
    lo, hi = math.ceil(q), math.ceil(q + 0.5) - 1
    expect = sum(math.comb(n, k) for k in range(lo, hi + 1)) / 2**n + 2.0**-n * (0 > -0.5)
    assert s.fraction_full_price == pytest.approx(expect, abs=1e-15)
    assert s.revenue == pytest.approx(q * sum(math.comb(n, k) for k in range(lo, n + 1)) / 2**n)


def test_full_price_guard():
    with pytest.raises(GuardExceeded):
        full_price_stats(Menu.zero(25), 25)


def test_bundle_curve_examples():
    c = bundle_price_curve(1)
    assert (c.best_price, c.best_revenue) == (1.0, 0.5)
    c = bundle_price_curve(16)
    assert c.revenues[c.prices.index(8.0)] == pytest.approx(8 * (1 - (1 - 12870 / 65536) / 2), abs=1e-12)
    gaps = [bundle_price_curve(n).gap for n in (16, 64, 256)]
    assert 0 < gaps[0] < gaps[1] < gaps[2]
    for n in (16, 64, 256):
        band = bundle_price_curve(n).gap / math.sqrt(n)
        assert 0.3 < band < 1.5


def test_bundle_curve_below_welfare():
    for n in range(2, 40):
        assert bundle_price_curve(n).best_revenue < n / 2


def test_cc_examples_and_codes():
    assert cc_deterministic(Menu([((1.0,), 1.0)])) == 0
    assert cc_deterministic(Menu([((k / 5,), k / 5) for k in range(1, 6)])) == 3
    assert cc_deterministic(separate_sale_menu([1.0] * 3)) == 3  # size 7
    assert cc_deterministic(Menu([((k / 8,), k / 8) for k in range(1, 9)])) == 3
    assert cc_deterministic(Menu.zero(1)) == 0
    M = Menu([((k / 11,), k / 11) for k in range(1, 12)])
    codes = [encode_entry(M, k) for k in range(11)]
    assert len(set(codes)) == 11 and all(len(c) == 4 for c in codes)
    assert [decode_entry(M, c) for c in codes] == list(range(11))


def test_protocol_posted_price():
    M = posted_price_menu(3.0)
    r = simulate_public_coin(M, 5.0, 1000, seed=1)
    assert (r.alloc, r.payment) == (1.0, 3.0)
    r = simulate_public_coin(M, 2.0, 1000, seed=1)
    assert (r.alloc, r.payment) == (0.0, 0.0)


def test_protocol_lottery_menu():
    M = Menu([((0.5,), 1.0), ((1.0,), 3.0)])
    for v, x, p in [(3.0, 0.5, 1.0), (5.0, 1.0, 3.0), (1.0, 0.0, 0.0)]:
        r = simulate_public_coin(M, v, 10**5, seed=2)
        assert (r.target_alloc, r.target_payment) == (x, p)
        assert abs(r.alloc - x) <= 4 * r.alloc_sigma + 1e-12
        assert abs(r.payment - p) <= 4 * r.payment_sigma + 1e-12


def test_protocol_determinism():
    M = Menu([((0.5,), 1.0), ((1.0,), 3.0)])
    assert simulate_public_coin(M, 3.0, 500, seed=9) == simulate_public_coin(M, 3.0, 500, seed=9)


def test_non_monotone_menu_detected(monkeypatch):
    import menusize.experiments as ex

    real = ex.choose

    def reversed_choice(M, values, tol=1e-9):
        # a buyer who picks the entry a truthful buyer would pick at the mirrored value
        V = np.asarray(values, dtype=float)
        return real(M, 5.0 - V, tol)

    monkeypatch.setattr(ex, "choose", reversed_choice)
    with pytest.raises(NonMonotoneAllocation):
        allocation_curve(Menu([((0.5,), 1.0), ((1.0,), 3.0)]))


def test_sum_rev_examples():
    assert check_sum_rev(JointDist.point([1.0, 2.0]), JointDist.point([3.0]))
    u = JointDist([[0.0], [1.0]], [0.5, 0.5])
    assert check_sum_rev(u, u)
    rng = np.random.default_rng(5)
    for _ in range(10):
        assert check_sum_rev(random_joint(rng, 1, 6), random_joint(rng, 2, 6))
