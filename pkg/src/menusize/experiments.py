"""Lower-bound demonstration, communication correspondence and small property probes.

The lower-bound ingredients work on the uniform ``{0,1}^n`` buyer: the
accounting of who pays full price under a candidate menu, and the exact
revenue curve of selling the grand bundle. The communication helpers index
menu entries with ``ceil(log2(size))`` bits and simulate the one-bit public
coin protocol for single-item auctions.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Union

import numpy as np

from menusize.core import DEFAULT_TOL, Menu, choose, menu_size
from menusize.dist import JointDist, ProductDist, SingleDist, product_joint
from menusize.errors import GuardExceeded, NonMonotoneAllocation
from menusize.oracle import DEFAULT_GUARD, rev_opt
from menusize.srev import CompoundMenu

ENUM_MAX_N = 24
FULL_PRICE_MARGIN = 1e-9
MONOTONE_TOL = 1e-9


def uniform01(n: int) -> ProductDist:
    """``n`` independent items, each worth 0 or 1 with probability one half."""
    if n < 1:
        raise ValueError("n must be >= 1")
    return ProductDist(tuple(SingleDist([0.0, 1.0], [0.5, 0.5]) for _ in range(n)))


@dataclass(frozen=True)
class FullPriceStats:
    n: int
    fraction_full_price: float
    revenue: float
    welfare: float


def subset_types(n: int, start: int, stop: int) -> np.ndarray:
    """Rows are the 0/1 indicator vectors of subsets ``start..stop-1`` in bit order."""
    k = np.arange(start, stop, dtype=np.int64)
    return ((k[:, None] >> np.arange(n)) & 1).astype(float)


def full_price_stats(M: Union[Menu, CompoundMenu], n: int, tol: float = DEFAULT_TOL,
                     chunk: int = 1 << 16) -> FullPriceStats:
    """Enumerate every subset type and count those paying more than ``|S| - 1/2``.

    A payment within ``1e-9`` of the threshold does not count as full price.
    """
    if n > ENUM_MAX_N:
        raise GuardExceeded(f"2**{n} subset types exceed the enumeration guard (n <= {ENUM_MAX_N})")
    if M.n != n:
        raise ValueError(f"menu has {M.n} items, expected {n}")
    total = 1 << n
    full = 0
    pay_sum = 0
    for lo in range(0, total, chunk):
        V = subset_types(n, lo, min(total, lo + chunk))
        if isinstance(M, CompoundMenu):
            pay = M.payments(V, tol)
        else:
            pay = M.prices[choose(M, V, tol)]
        full += int(np.count_nonzero(pay > V.sum(axis=1) - 0.5 + FULL_PRICE_MARGIN))
        pay_sum += math.fsum(pay.tolist())
    return FullPriceStats(n, full / total, pay_sum / total, n / 2)


@dataclass(frozen=True)
class BundleCurve:
    n: int
    prices: tuple[float, ...]
    revenues: tuple[float, ...]
    best_price: float
    best_revenue: float

    @property
    def gap(self) -> float:
        """Shortfall of the best bundle price from the full welfare ``n/2``."""
        return self.n / 2 - self.best_revenue


def binomial_tail(n: int) -> list[Fraction]:
    """``P(Bin(n, 1/2) >= k)`` for ``k = 0..n+1`` as exact fractions."""
    tails = [Fraction(0)] * (n + 2)
    acc = 0
    for k in range(n, -1, -1):
        acc += math.comb(n, k)
        tails[k] = Fraction(acc, 1 << n)
    return tails


def bundle_price_curve(n: int, step: Fraction = Fraction(1, 2)) -> BundleCurve:
    """Revenue ``q * P(Bin(n, 1/2) >= q)`` of the grand bundle at each price ``q`` on a grid.

    Prices run over multiples of ``step`` in ``[0, n]``; the default is
    integers and half-integers. Ties for the best price go to the smaller one.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    step = Fraction(step)
    tails = binomial_tail(n)
    prices, revs = [], []
    best_q, best_r = Fraction(0), Fraction(0)
    for j in range(int(n / step) + 1):
        q = j * step
        r = q * tails[math.ceil(q)]
        prices.append(float(q))
        revs.append(float(r))
        if r > best_r:
            best_q, best_r = q, r
    return BundleCurve(n, tuple(prices), tuple(revs), float(best_q), float(best_r))


def cc_deterministic(M: Menu) -> int:
    """Bits needed to name one nonzero entry: ``ceil(log2(menu_size))``, 0 for sizes 0 and 1."""
    size = menu_size(M)
    return 0 if size <= 1 else (size - 1).bit_length()


def encode_entry(M: Menu, k: int) -> str:
    """Fixed-width bit string naming the ``k``-th nonzero entry of ``M``."""
    size = menu_size(M)
    if not (0 <= k < size):
        raise IndexError(f"entry {k} out of range for menu size {size}")
    width = cc_deterministic(M)
    return format(k, f"0{width}b") if width else ""


def decode_entry(M: Menu, bits: str) -> int:
    k = int(bits, 2) if bits else 0
    if k >= menu_size(M):
        raise IndexError(f"code {bits!r} names no entry")
    return k


@dataclass(frozen=True)
class ProtocolRun:
    alloc: float
    payment: float
    target_alloc: float
    target_payment: float
    alloc_sigma: float
    payment_sigma: float
    breakpoints: tuple[float, ...]


def allocation_curve(M: Menu, tol: float = DEFAULT_TOL) -> tuple[np.ndarray, np.ndarray]:
    """Values where the buyer's choice can change, and the allocation from each onward.

    Candidates are 0 and every nonnegative indifference point of two entries.
    Raises :class:`NonMonotoneAllocation` if the allocation ever drops.
    """
    if M.n != 1:
        raise ValueError("allocation curves need a single-item menu")
    x, p = M.allocs[:, 0], M.prices
    dx = x[:, None] - x[None, :]
    dp = p[:, None] - p[None, :]
    with np.errstate(divide="ignore", invalid="ignore"):
        w = np.where(dx != 0, dp / dx, np.nan)
    cand = np.unique(np.concatenate([[0.0], w[np.isfinite(w) & (w >= 0)]]))
    probes = np.concatenate([cand, (cand[:-1] + cand[1:]) / 2, [cand[-1] + 1.0]])
    order = np.argsort(probes, kind="stable")
    xs = x[choose(M, probes[order, None], tol)]
    if np.any(np.diff(xs) < -MONOTONE_TOL):
        raise NonMonotoneAllocation("allocation decreases with value; menu is not IC")
    return cand, x[choose(M, cand[:, None], tol)]


def simulate_public_coin(M: Menu, v: float, trials: int, seed: int = 0,
                         tol: float = DEFAULT_TOL) -> ProtocolRun:
    """Run the one-bit public-coin protocol ``trials`` times for a buyer of value ``v``.

    Each trial draws ``U`` in ``(0, 1]`` and a threshold ``P``, the smallest
    value whose allocation reaches ``U``. The buyer says whether ``v >= P``;
    the charge is ``P + p0`` if yes and ``p0`` otherwise, where ``p0`` is
    the payment of a buyer of value 0.
    """
    if trials < 1:
        raise ValueError("trials must be >= 1")
    bp, xb = allocation_curve(M, tol)
    xb = np.maximum.accumulate(xb)
    p0 = float(M.prices[choose(M, [[0.0]], tol)[0]])
    k = int(choose(M, [[v]], tol)[0])
    target_x, target_p = float(M.allocs[k, 0]), float(M.prices[k])

    # exact law of the charge: P_j + p0 with prob x_j - x_{j-1} for P_j <= v, else p0
    reach = bp <= v + tol
    inc = np.diff(np.concatenate([[0.0], xb]))
    charge = bp + p0
    mass_alloc = inc[reach]
    mean_pay = p0 + float(np.dot(mass_alloc, bp[reach]))
    var_pay = float(np.dot(mass_alloc, (charge[reach] - mean_pay) ** 2)
                    + (1 - mass_alloc.sum()) * (p0 - mean_pay) ** 2)

    rng = np.random.default_rng(seed)
    U = 1.0 - rng.random(trials)
    j = np.searchsorted(xb, U, side="left")
    P = np.where(j < bp.size, bp[np.minimum(j, bp.size - 1)], np.inf)
    got = v >= P - tol
    pay = np.where(got, P + p0, p0)
    return ProtocolRun(
        alloc=float(got.mean()), payment=float(pay.mean()),
        target_alloc=target_x, target_payment=target_p,
        alloc_sigma=math.sqrt(target_x * (1 - target_x) / trials),
        payment_sigma=math.sqrt(max(var_pay, 0.0) / trials),
        breakpoints=tuple(bp.tolist()),
    )


def check_sum_rev(F: JointDist, G: JointDist, guard: int = DEFAULT_GUARD) -> bool:
    """``Rev(F x G) <= 2 (Rev(F) + Rev(G))`` with a ``1e-6`` slack, by the LP oracle."""
    both = product_joint(F, G, limit=guard)
    return rev_opt(both, guard) <= 2 * (rev_opt(F, guard) + rev_opt(G, guard)) + 1e-6
