import numpy as np

from menusize.dist import ProductDist, SingleDist
from menusize.myerson import myerson_price, srev
from menusize.experiments import uniform01
from corpus import random_single


def test_examples():
    r = myerson_price(SingleDist([0.0, 1.0], [0.5, 0.5]))
    assert (r.price, r.sell_prob, r.revenue) == (1.0, 0.5, 0.5)
    r = myerson_price(SingleDist([1.0, 2.0], [0.5, 0.5]))
    assert (r.price, r.sell_prob, r.revenue) == (1.0, 1.0, 1.0)
    r = myerson_price(SingleDist.point(3.5))
    assert (r.price, r.sell_prob, r.revenue) == (3.5, 1.0, 3.5)


def test_srev_examples():
    assert srev(uniform01(6)) == 3.0
    assert srev(ProductDist((SingleDist.point(1.0),) * 5)) == 5.0
    items = (SingleDist([1.0, 2.0], [0.5, 0.5]), SingleDist([0.0, 4.0], [0.75, 0.25]))
    assert srev(ProductDist(items)) == 2.0


def test_optimality_scale_and_identity():
    rng = np.random.default_rng(11)
    for _ in range(200):
        d = random_single(rng)
        r = myerson_price(d)
        assert abs(r.revenue - r.price * r.sell_prob) <= 1e-9
        assert r.price in d.values
        for v in d.values:
            assert v * d.probs[d.values >= v].sum() <= r.revenue + 1e-9
        lam = float(rng.uniform(0.1, 10))
        s = myerson_price(d.scaled(lam))
        assert abs(s.price - lam * r.price) <= 1e-9 * max(1, s.price)
        assert abs(s.revenue - lam * r.revenue) <= 1e-9 * max(1, s.revenue)
        assert s.sell_prob == r.sell_prob
