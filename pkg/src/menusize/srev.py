"""Compound auctions that approximate separate-selling revenue with few menu entries.

Items are grouped by their optimal posted price ``c_i``. Cheap items are
given away as one free bundle, very expensive items are offered in a single
unit-demand sub-menu, and every other price class is sold as bundles priced
at the bottom of the class. A class with large total sale probability is
sold as one bundle; otherwise it is split so that each bundle rarely has two
items that would have sold on their own.

A :class:`CompoundMenu` is never flattened. Its sub-auctions act on disjoint
item sets, so an additive buyer's choice and the seller's revenue decompose
over them.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from menusize.core import DEFAULT_TOL, Menu, chunk_rngs, choose, mean_and_stderr, revenue_exact
from menusize.dist import DEFAULT_LIMIT, ProductDist, SingleDist, expand, sample_many
from menusize.errors import DimensionMismatch, SupportTooLarge
from menusize.myerson import ItemPricing, myerson_price

CONV_STATE_CAP = 200_000
DENSE_EXACT_MAX_ITEMS = 10_000


@dataclass(frozen=True, eq=False)
class CompoundMenu:
    """Independent sub-auctions over pairwise disjoint item sets of ``n`` items."""
    n: int
    subauctions: tuple[tuple[tuple[int, ...], Menu], ...]

    def __post_init__(self):
        subs = tuple((tuple(int(i) for i in items), menu) for items, menu in self.subauctions)
        seen: set[int] = set()
        for items, menu in subs:
            if menu.n != len(items):
                raise DimensionMismatch(f"sub-menu over {menu.n} items listed with {len(items)} indices")
            if seen.intersection(items) or len(set(items)) != len(items):
                raise ValueError("sub-auction item sets must be pairwise disjoint")
            if any(not (0 <= i < self.n) for i in items):
                raise ValueError(f"item index out of range for n={self.n}")
            seen.update(items)
        object.__setattr__(self, "subauctions", subs)

    def __len__(self) -> int:
        return len(self.subauctions)

    def payments(self, values: np.ndarray, tol: float = DEFAULT_TOL) -> np.ndarray:
        """Total payment of each row of ``values`` (shape ``(k, n)``)."""
        V = np.atleast_2d(values)
        total = np.zeros(V.shape[0])
        for items, menu in self.subauctions:
            total += menu.prices[choose(menu, V[:, list(items)], tol)]
        return total


def count_choices(C: CompoundMenu) -> int:
    """Number of nonzero outcomes of the flattened menu, as an exact integer."""
    return math.prod(len(m) - int(m.zero_mask().sum()) + 1 for _, m in C.subauctions) - 1


def pack_sparse(weights: Sequence[float], cap: float) -> list[list[int]]:
    """Partition indices so that in every set, the weight of the others is at most ``cap``.

    Greedy: sort by weight descending, take the longest prefix whose sum is
    at most ``cap`` plus one more index, and repeat on the rest. Every set
    but the last has weight above ``cap``, so at most
    ``ceil(sum(weights) / cap)`` sets are produced.
    """
    w = np.asarray(weights, dtype=float).reshape(-1)
    if cap <= 0 or np.any(w <= 0):
        raise ValueError("weights and cap must be positive")
    order = sorted(range(w.size), key=lambda k: (-w[k], k))
    parts = []
    pos = 0
    while pos < len(order):
        acc = []
        end = pos
        while end < len(order) and math.fsum(acc + [w[order[end]]]) <= cap:
            acc.append(w[order[end]])
            end += 1
        end = min(end + 1, len(order))
        parts.append(order[pos:end])
        pos = end
    return parts


@dataclass
class Buckets:
    eps_tilde: float
    m: int
    low: tuple[int, ...]
    high: tuple[int, ...]
    regular: dict[int, tuple[int, ...]]
    mu: dict[int, float] = field(default_factory=dict)
    dense: dict[int, bool] = field(default_factory=dict)


def bucket_index(c: float, eps_t: float, m: int) -> int:
    """``b`` with ``(1+eps_t)**b <= c < (1+eps_t)**(b+1)``, kept in ``[-m, m-1]``."""
    base = 1 + eps_t
    b = math.floor(math.log(c) / math.log(base))
    while base ** (b + 1) <= c:
        b += 1
    while base ** b > c:
        b -= 1
    return min(max(b, -m), m - 1)


def bucketize(pricings: Sequence[ItemPricing], eps_t: float) -> Buckets:
    """Classify items by posted price; pricings must be normalized so the largest revenue is 1."""
    if not (0 < eps_t < 1):
        raise ValueError("need 0 < eps_tilde < 1")
    n = len(pricings)
    m = math.ceil(math.log(n / eps_t) / math.log(1 + eps_t))
    low, high, regular = [], [], {}
    for i, pr in enumerate(pricings):
        if pr.price >= n / eps_t:
            high.append(i)
        elif pr.price < eps_t / n:
            low.append(i)
        else:
            regular.setdefault(bucket_index(pr.price, eps_t, m), []).append(i)
    regular = {b: tuple(v) for b, v in sorted(regular.items())}
    mu = {b: math.fsum(pricings[i].sell_prob for i in v) for b, v in regular.items()}
    dense = {b: mu[b] > eps_t ** -3 for b in regular}
    return Buckets(eps_t, m, tuple(low), tuple(high), regular, mu, dense)


@dataclass(frozen=True)
class SubauctionInfo:
    kind: str  # "low", "high", "dense", "sparse" or "single"
    items: tuple[int, ...]
    bucket: Optional[int]
    price: Optional[float]
    sum_revenue: float
    sum_sell_prob: float


@dataclass
class SrevReport:
    eps: float
    eps_tilde: Optional[float]
    scale: float
    separate: bool
    buckets: Optional[Buckets]
    subauctions: list[SubauctionInfo]
    num_bundles: int
    count_choices: int
    srev: float

    def to_dict(self) -> dict:
        b = self.buckets
        return {
            "eps": self.eps, "eps_tilde": self.eps_tilde, "scale": self.scale,
            "separate_selling": self.separate, "srev": self.srev,
            "num_bundles": self.num_bundles, "count_choices": str(self.count_choices),
            "buckets": None if b is None else {
                "m": b.m, "low": list(b.low), "high": list(b.high),
                "regular": {str(k): list(v) for k, v in b.regular.items()},
                "mu": {str(k): v for k, v in b.mu.items()},
                "dense": {str(k): v for k, v in b.dense.items()},
            },
            "subauctions": [s.__dict__ | {"items": list(s.items)} for s in self.subauctions],
        }


def _bundle(k: int, price: float) -> Menu:
    return Menu.from_arrays(np.ones((1, k)), [price])


def build_srev_auction(F: ProductDist, eps: float) -> tuple[CompoundMenu, SrevReport]:
    """Compound auction with revenue at least ``(1 - eps) * SRev(F)``."""
    if not (0 < eps < 1):
        raise ValueError("need 0 < eps < 1")
    n = F.n
    pr = [myerson_price(d) for d in F.items]
    srev_value = math.fsum(p.revenue for p in pr)
    r_max = max(p.revenue for p in pr)
    subs: list[tuple[tuple[int, ...], Menu]] = []
    infos: list[SubauctionInfo] = []

    if r_max == 0 or n < 4 / eps:
        for i, p in enumerate(pr):
            if p.revenue > 0:
                subs.append(((i,), _bundle(1, p.price)))
                infos.append(SubauctionInfo("single", (i,), None, p.price, p.revenue, p.sell_prob))
        C = CompoundMenu(n, tuple(subs))
        return C, SrevReport(eps, None, 1.0, True, None, infos, len(subs), count_choices(C), srev_value)

    eps_t = eps / 4
    scale = 1 / r_max
    spr = [ItemPricing(p.price * scale, p.sell_prob, p.revenue * scale) for p in pr]
    B = bucketize(spr, eps_t)

    def info(kind, items, bucket, price):
        return SubauctionInfo(kind, tuple(items), bucket, price,
                              math.fsum(pr[i].revenue for i in items),
                              math.fsum(pr[i].sell_prob for i in items))

    if B.low:
        subs.append((B.low, _bundle(len(B.low), 0.0)))
        infos.append(info("low", B.low, None, 0.0))
    if B.high:
        k = len(B.high)
        menu = Menu.from_arrays(np.eye(k), [pr[i].price for i in B.high])
        subs.append((B.high, menu))
        infos.append(info("high", B.high, None, None))
    for b, items in B.regular.items():
        floor_price = (1 + eps_t) ** b / scale
        if B.dense[b]:
            price = (1 - eps_t) * B.mu[b] * floor_price
            subs.append((items, _bundle(len(items), price)))
            infos.append(info("dense", items, b, price))
        else:
            for part in pack_sparse([spr[i].sell_prob for i in items], eps_t):
                bundle = tuple(items[k] for k in part)
                subs.append((bundle, _bundle(len(bundle), floor_price)))
                infos.append(info("sparse", bundle, b, floor_price))
    C = CompoundMenu(n, tuple(subs))
    num_bundles = sum(1 for s in infos if s.kind != "high")
    return C, SrevReport(eps, eps_t, scale, False, B, infos, num_bundles, count_choices(C), srev_value)


def bundle_sale_prob(items: Sequence[SingleDist], price: float, tol: float = DEFAULT_TOL,
                     state_cap: int = CONV_STATE_CAP) -> Optional[float]:
    """``P(sum of independent values >= price - tol)`` by convolution.

    Partial sums that already reach the threshold are merged into one
    absorbing state. Returns ``None`` when the number of distinct partial
    sums would exceed ``state_cap``.
    """
    thr = price - tol
    states = {0.0: 1.0}
    sold = 0.0
    for d in items:
        nxt: dict[float, float] = {}
        for s, q in states.items():
            for v, pv in zip(d.values.tolist(), d.probs.tolist()):
                t = s + v
                if t >= thr:
                    sold += q * pv
                else:
                    nxt[t] = nxt.get(t, 0.0) + q * pv
        if len(nxt) > state_cap:
            return None
        states = nxt
    return min(1.0, sold)


def unit_demand_revenue(items: Sequence[SingleDist], prices: Sequence[float],
                        tol: float = DEFAULT_TOL) -> float:
    """Exact revenue of offering any one item ``i`` at ``prices[i]``.

    Uses the library tie rule: utility ties within ``tol`` go to the higher
    price, then the lower index; the free zero entry is the fallback.
    """
    terms = []
    for i, (di, ci) in enumerate(zip(items, prices)):
        for v, pv in zip(di.values.tolist(), di.probs.tolist()):
            u = v - ci
            if u < -tol:
                continue
            q = pv
            for j, (dj, cj) in enumerate(zip(items, prices)):
                if j == i:
                    continue
                uj = dj.values - cj
                beats = (uj > u + tol) | ((np.abs(uj - u) <= tol)
                                          & ((cj > ci) | ((cj == ci) & (j < i))))
                q *= 1.0 - float(dj.probs[beats].sum())
                if q == 0.0:
                    break
            terms.append(ci * q)
    return math.fsum(terms)


def _structure(menu: Menu) -> str:
    nz = ~menu.zero_mask()
    A = menu.allocs[nz]
    if A.shape[0] == 1 and np.all(A == 1.0):
        return "bundle"
    if np.all((A == 0.0) | (A == 1.0)) and np.all(A.sum(axis=1) == 1) \
            and len(set(np.argmax(A, axis=1).tolist())) == A.shape[0]:
        return "unit_demand"
    return "general"


def subauction_revenue_exact(items: tuple[int, ...], menu: Menu, F: ProductDist,
                             limit: int = DEFAULT_LIMIT, tol: float = DEFAULT_TOL) -> Optional[float]:
    """Exact revenue of one sub-auction on its marginal, or ``None`` if out of reach."""
    dists = [F.items[i] for i in items]
    kind = _structure(menu)
    nz = ~menu.zero_mask()
    if kind == "bundle":
        price = float(menu.prices[nz][0])
        if price == 0.0:
            return 0.0
        if len(items) <= DENSE_EXACT_MAX_ITEMS:
            q = bundle_sale_prob(dists, price, tol)
            if q is not None:
                return price * q
        return None
    if kind == "unit_demand":
        order = np.argmax(menu.allocs[nz], axis=1)
        prices = np.full(len(items), np.inf)
        prices[order] = menu.prices[nz]
        sub = [(d, p) for d, p in zip(dists, prices) if np.isfinite(p)]
        return unit_demand_revenue([d for d, _ in sub], [p for _, p in sub], tol)
    marg = ProductDist(tuple(dists))
    if marg.support_size > limit:
        return None
    return revenue_exact(menu, expand(marg, limit), tol)


def _mc_payments(subs, F: ProductDist, samples: int, seed: int, tol: float) -> np.ndarray:
    cols = sorted({i for items, _ in subs for i in items})
    pos = {i: k for k, i in enumerate(cols)}
    marg = ProductDist(tuple(F.items[i] for i in cols))
    out = []
    for size, rng in chunk_rngs(samples, seed):
        V = sample_many(marg, size, rng)
        pay = np.zeros(size)
        for items, menu in subs:
            pay += menu.prices[choose(menu, V[:, [pos[i] for i in items]], tol)]
        out.append(pay)
    return np.concatenate(out)


def compound_revenue(C: CompoundMenu, F: ProductDist, mode: str = "auto", samples: int = 10**6,
                     seed: int = 0, limit: int = DEFAULT_LIMIT,
                     tol: float = DEFAULT_TOL) -> tuple[float, float]:
    """Revenue of a compound auction and its standard error.

    ``exact`` evaluates every sub-auction analytically and raises
    :class:`SupportTooLarge` if one is out of reach; ``mc`` samples whole
    types; ``auto`` is exact where possible and samples only the rest, so
    the standard error comes from the sampled part alone.
    """
    if F.n != C.n:
        raise DimensionMismatch(f"distribution has {F.n} items, compound menu has {C.n}")
    if mode not in ("exact", "mc", "auto"):
        raise ValueError(f"unknown mode {mode!r}")
    exact_parts: list[float] = []
    rest = []
    for items, menu in C.subauctions:
        r = None if mode == "mc" else subauction_revenue_exact(items, menu, F, limit, tol)
        if r is None:
            if mode == "exact":
                raise SupportTooLarge(f"sub-auction over {len(items)} items is out of exact reach")
            rest.append((items, menu))
        else:
            exact_parts.append(r)
    total = math.fsum(exact_parts)
    if not rest:
        return total, 0.0
    mean, se = mean_and_stderr(_mc_payments(rest, F, samples, seed, tol))
    return total + mean, se
