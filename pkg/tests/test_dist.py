import math

import numpy as np
import pytest

from menusize.dist import (EuRegion, JointDist, ProductDist, SingleDist, compute_H, condition_eu,
                           eu_contains, expand, sample, sample_many)
from menusize.errors import SupportTooLarge, ZeroMass
from menusize.myerson import myerson_price

U01 = SingleDist([0.0, 1.0], [0.5, 0.5])


def test_single_dist_validation():
    with pytest.raises(ValueError):
        SingleDist([1.0, 0.0], [0.5, 0.5])
    with pytest.raises(ValueError):
        SingleDist([0.0, 1.0], [0.5, 0.6])
    with pytest.raises(ValueError):
        SingleDist([0.0, 1.0], [1.0, 0.0])


def test_joint_rejects_repeated_types():
    with pytest.raises(ValueError):
        JointDist([[1.0], [1.0]], [0.5, 0.5])
    J = JointDist.from_pairs([[1.0], [1.0], [2.0]], [1, 1, 2])
    assert len(J) == 2 and np.allclose(J.probs, [0.5, 0.5])


def test_expand_examples():
    J = expand(ProductDist((U01, U01)))
    assert len(J) == 4 and np.allclose(J.probs, 0.25)
    J1 = expand(ProductDist((U01,)))
    assert np.array_equal(J1.types[:, 0], U01.values)
    F = ProductDist((SingleDist([0, 1], [0.3, 0.7]), SingleDist([0, 1, 2], [0.2, 0.3, 0.5]),
                     SingleDist([0, 1, 2, 3], [0.1] * 3 + [0.7])))
    J = expand(F)
    assert len(J) == 24 and abs(J.probs.sum() - 1) < 1e-12


def test_expand_limit():
    with pytest.raises(SupportTooLarge):
        expand(ProductDist((U01,) * 5), limit=31)


def test_eu_contains_examples():
    r = EuRegion(5.0, 2)
    assert eu_contains([3, 4], r)
    assert not eu_contains([10, 10], r)
    assert eu_contains([10, 5], r)


def test_condition_eu_examples():
    d = SingleDist([0.0, 10.0], [0.5, 0.5])
    cond, mass = condition_eu(ProductDist((d, d)), EuRegion(5.0, 2))
    assert mass == 0.75
    assert sorted(map(tuple, cond.types.tolist())) == [(0, 0), (0, 10), (10, 0)]
    assert np.allclose(cond.probs, 1 / 3)
    cond, mass = condition_eu(ProductDist((U01, U01)), EuRegion(5.0, 2))
    assert mass == 1.0 and cond == expand(ProductDist((U01, U01)))
    cond, mass = condition_eu(ProductDist((d,)), EuRegion(5.0, 1))
    assert mass == 1.0


def test_condition_eu_zero_mass():
    d = SingleDist.point(10.0)
    with pytest.raises(ZeroMass):
        condition_eu(ProductDist((d, d)), EuRegion(5.0, 2))


def test_condition_mass_matches_retained_probability():
    rng = np.random.default_rng(3)
    for _ in range(20):
        F = ProductDist(tuple(SingleDist.from_pairs(rng.integers(0, 20, 4), rng.random(4) + 0.1)
                              for _ in range(3)))
        J = expand(F)
        H = 9.5
        keep = (J.types > H).sum(axis=1) <= 1
        cond, mass = condition_eu(F, EuRegion(H, 3))
        assert abs(mass - math.fsum(J.probs[keep])) < 1e-12
        assert abs(cond.probs.sum() - 1) < 1e-9


def test_sampling():
    F = ProductDist((SingleDist.point(2.0), SingleDist.point(5.0)))
    assert np.array_equal(sample(F, np.random.default_rng(0)), [2.0, 5.0])
    d = SingleDist([0.0, 1.0, 3.0], [0.2, 0.5, 0.3])
    draws = sample_many(ProductDist((d,)), 10**5, np.random.default_rng(1))[:, 0]
    for v, p in zip(d.values, d.probs):
        freq = np.mean(draws == v)
        assert abs(freq - p) <= 4 * math.sqrt(p * (1 - p) / 10**5)
    a = sample_many(ProductDist((d,)), 50, np.random.default_rng(9))
    b = sample_many(ProductDist((d,)), 50, np.random.default_rng(9))
    assert np.array_equal(a, b)


def test_compute_H_examples():
    assert compute_H(2, 1, 0.5) == 8
    assert abs(compute_H(3, 1, 1 - 1e-12) - 12) < 1e-9
    assert abs(compute_H(2, 2.5, 0.1) - 100) < 1e-9
    with pytest.raises(ValueError):
        compute_H(1, 1, 0.5)


def test_tail_probability_bound():
    rng = np.random.default_rng(4)
    for _ in range(100):
        d = SingleDist.from_pairs(rng.choice([0, 1, 2, 5, 50, 400, 3000], 4), rng.random(4) + 0.01)
        n = int(rng.integers(2, 5))
        eps = float(rng.choice([0.25, 0.5]))
        R = myerson_price(d).revenue
        H = compute_H(n, R, eps)
        tail = d.probs[d.values > H].sum()
        assert tail <= eps / (2 * n * (n - 1)) + 1e-12
