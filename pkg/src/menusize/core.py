"""Menus, buyer utility, best response and revenue for a single additive buyer.

A menu is a finite list of outcomes ``(alloc; price)``. The buyer picks the
entry that maximizes ``alloc @ values - price``; utilities within ``tol`` of
the maximum count as ties, ties go to the highest price, and remaining ties
go to the lowest entry index. The zero entry is always present, so the buyer
never gets negative utility.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np
from numpy.typing import ArrayLike, NDArray

from menusize.errors import DimensionMismatch

DEFAULT_TOL = 1e-9
MC_CHUNK = 1 << 16


@dataclass(frozen=True)
class MenuEntry:
    alloc: tuple[float, ...]
    price: float

    def __post_init__(self):
        alloc = tuple(float(a) for a in self.alloc)
        object.__setattr__(self, "alloc", alloc)
        object.__setattr__(self, "price", float(self.price))
        if any(not (0.0 <= a <= 1.0) for a in alloc):
            raise ValueError(f"allocation probabilities must lie in [0, 1]: {alloc}")
        if not (self.price >= 0.0):
            raise ValueError(f"price must be nonnegative: {self.price}")

    @property
    def n(self) -> int:
        return len(self.alloc)

    def is_zero(self) -> bool:
        return self.price == 0.0 and all(a == 0.0 for a in self.alloc)


@dataclass(frozen=True)
class ChoiceResult:
    entry_index: int
    utility: float
    price_paid: float


class Menu:
    """An immutable finite menu over ``n`` items.

    The zero entry is prepended when missing and exact duplicates are
    collapsed, keeping the first occurrence.
    """

    __slots__ = ("_allocs", "_prices")

    def __init__(self, entries: Iterable[MenuEntry | tuple], n: int | None = None):
        rows = []
        prices = []
        for e in entries:
            if not isinstance(e, MenuEntry):
                alloc, price = e
                e = MenuEntry(tuple(alloc), price)
            rows.append(e.alloc)
            prices.append(e.price)
        if n is None:
            if not rows:
                raise ValueError("cannot infer n from an empty entry list")
            n = len(rows[0])
        allocs = np.array(rows, dtype=float).reshape(len(rows), n) if rows else np.zeros((0, n))
        self._init_arrays(allocs, np.array(prices, dtype=float), n)

    @classmethod
    def from_arrays(cls, allocs: ArrayLike, prices: ArrayLike) -> "Menu":
        allocs = np.asarray(allocs, dtype=float)
        prices = np.asarray(prices, dtype=float).reshape(-1)
        if allocs.ndim != 2 or allocs.shape[0] != prices.shape[0]:
            raise DimensionMismatch("allocs must be (k, n) with one price per row")
        if np.any(allocs < 0.0) or np.any(allocs > 1.0):
            raise ValueError("allocation probabilities must lie in [0, 1]")
        if np.any(~(prices >= 0.0)):
            raise ValueError("prices must be nonnegative")
        menu = cls.__new__(cls)
        menu._init_arrays(allocs, prices, allocs.shape[1])
        return menu

    @classmethod
    def zero(cls, n: int) -> "Menu":
        return cls.from_arrays(np.zeros((1, n)), np.zeros(1))

    def _init_arrays(self, allocs: NDArray, prices: NDArray, n: int) -> None:
        if allocs.shape[1] != n:
            raise DimensionMismatch("all entries must have dimension n")
        seen = set()
        keep = []
        for k in range(len(prices)):
            key = (tuple(allocs[k].tolist()), float(prices[k]))
            if key not in seen:
                seen.add(key)
                keep.append(k)
        allocs = allocs[keep]
        prices = prices[keep]
        zero = (prices == 0.0) & np.all(allocs == 0.0, axis=1)
        if not zero.any():
            allocs = np.vstack([np.zeros((1, n)), allocs])
            prices = np.concatenate([[0.0], prices])
        allocs = np.ascontiguousarray(allocs, dtype=float)
        prices = np.ascontiguousarray(prices, dtype=float)
        allocs.flags.writeable = False
        prices.flags.writeable = False
        self._allocs = allocs
        self._prices = prices

    @property
    def allocs(self) -> NDArray:
        return self._allocs

    @property
    def prices(self) -> NDArray:
        return self._prices

    @property
    def n(self) -> int:
        return self._allocs.shape[1]

    @property
    def entries(self) -> list[MenuEntry]:
        return [MenuEntry(tuple(a), p) for a, p in zip(self._allocs.tolist(), self._prices.tolist())]

    def zero_mask(self) -> NDArray:
        return (self._prices == 0.0) & np.all(self._allocs == 0.0, axis=1)

    def subset(self, mask_or_index) -> "Menu":
        return Menu.from_arrays(self._allocs[mask_or_index], self._prices[mask_or_index])

    def with_prices(self, prices: ArrayLike) -> "Menu":
        return Menu.from_arrays(self._allocs, prices)

    def __len__(self) -> int:
        return len(self._prices)

    def __iter__(self):
        return iter(self.entries)

    def __eq__(self, other) -> bool:
        if not isinstance(other, Menu):
            return NotImplemented
        return (self._allocs.shape == other._allocs.shape
                and np.array_equal(self._allocs, other._allocs)
                and np.array_equal(self._prices, other._prices))

    def __repr__(self) -> str:
        return f"Menu(n={self.n}, size={menu_size(self)})"


def _as_values(v: ArrayLike, n: int) -> NDArray:
    v = np.asarray(v, dtype=float)
    if v.shape[-1] != n:
        raise DimensionMismatch(f"type has {v.shape[-1]} values, menu has {n} items")
    return v


def utility(entry: MenuEntry, v: ArrayLike) -> float:
    """Expected utility ``sum_i alloc[i] * v[i] - price``."""
    v = _as_values(v, entry.n)
    return math.fsum(a * x for a, x in zip(entry.alloc, v.tolist())) - entry.price


def choose(menu: Menu, values: ArrayLike, tol: float = DEFAULT_TOL,
           lowest_price: bool = False) -> NDArray:
    """Vectorized best response: entry index chosen by each row of ``values``.

    ``lowest_price=True`` flips the price tie rule; it exists to test that
    revenue guarantees do not hinge on tie-breaking.
    """
    V = np.atleast_2d(_as_values(values, menu.n))
    # Order columns by the tie rule (price, then index) so that the first
    # near-maximal column in this order is the chosen entry.
    key = menu.prices if lowest_price else -menu.prices
    order = np.lexsort((np.arange(len(key)), key))
    allocs_t = np.ascontiguousarray(menu.allocs[order].T)
    prices = menu.prices[order]
    out = np.empty(V.shape[0], dtype=np.intp)
    step = max(1, (1 << 20) // max(1, len(prices)))
    for lo in range(0, V.shape[0], step):
        U = V[lo:lo + step] @ allocs_t
        U -= prices
        umax = U.max(axis=1, keepdims=True)
        out[lo:lo + step] = order[np.argmax(U >= umax - tol, axis=1)]
    return out


def best_response(menu: Menu, v: ArrayLike, tol: float = DEFAULT_TOL) -> ChoiceResult:
    if tol < 0:
        raise ValueError("tol must be nonnegative")
    v = _as_values(v, menu.n)
    k = int(choose(menu, v[None, :], tol)[0])
    u = float(menu.allocs[k] @ v - menu.prices[k])
    return ChoiceResult(k, u, float(menu.prices[k]))


def payments(menu: Menu, values: ArrayLike, tol: float = DEFAULT_TOL,
             lowest_price: bool = False) -> NDArray:
    return menu.prices[choose(menu, values, tol, lowest_price)]


def revenue_exact(menu: Menu, F, tol: float = DEFAULT_TOL, lowest_price: bool = False) -> float:
    """Expected payment over a finite-support distribution.

    ``F`` is a :class:`~menusize.dist.JointDist`; a ``ProductDist`` is
    expanded first.
    """
    from menusize.dist import ProductDist, expand

    if isinstance(F, ProductDist):
        F = expand(F)
    if F.n != menu.n:
        raise DimensionMismatch(f"distribution has {F.n} items, menu has {menu.n}")
    pay = payments(menu, F.types, tol, lowest_price)
    return math.fsum((F.probs * pay).tolist())


def revenue_mc(menu: Menu, F, samples: int, seed: int = 0,
               tol: float = DEFAULT_TOL) -> tuple[float, float]:
    """Monte Carlo revenue estimate and its standard error.

    Samples are drawn in fixed-size chunks, each from its own child seed of
    ``seed``, so the result depends only on ``(samples, seed)``.
    """
    from menusize.dist import sample_many

    if samples < 1:
        raise ValueError("samples must be >= 1")
    if F.n != menu.n:
        raise DimensionMismatch(f"distribution has {F.n} items, menu has {menu.n}")
    pay = np.concatenate([
        payments(menu, sample_many(F, size, rng), tol)
        for size, rng in chunk_rngs(samples, seed)
    ])
    return mean_and_stderr(pay)


def chunk_rngs(samples: int, seed: int, chunk: int = MC_CHUNK):
    nchunks = -(-samples // chunk)
    children = np.random.SeedSequence(seed).spawn(nchunks)
    for c, ss in enumerate(children):
        size = min(chunk, samples - c * chunk)
        yield size, np.random.default_rng(ss)


def mean_and_stderr(x: NDArray) -> tuple[float, float]:
    x = np.asarray(x, dtype=float)
    if x.size <= 1:
        return float(x.mean()), 0.0
    return float(x.mean()), float(x.std(ddof=1) / math.sqrt(x.size))


def menu_size(menu: Menu) -> int:
    """Number of entries other than the zero entry."""
    return int(len(menu) - menu.zero_mask().sum())


def separate_sale_menu(prices: Sequence[float]) -> Menu:
    """Flat menu selling every subset ``S`` for the sum of its item prices."""
    n = len(prices)
    if n > 20:
        raise ValueError("flat separate-sale menu has 2**n entries; use a CompoundMenu")
    k = np.arange(1 << n)
    allocs = ((k[:, None] >> np.arange(n)) & 1).astype(float)
    return Menu.from_arrays(allocs, allocs @ np.asarray(prices, dtype=float))
