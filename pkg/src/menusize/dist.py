"""Finite-support value distributions.

Per-item distributions are :class:`SingleDist`; independent items form a
:class:`ProductDist`; explicit (possibly correlated) type lists are a
:class:`JointDist`. Continuous priors enter as empirical samples via
:meth:`SingleDist.from_samples`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from numpy.typing import ArrayLike, NDArray

from menusize.errors import DimensionMismatch, SupportTooLarge, ZeroMass

DEFAULT_LIMIT = 10**6
PROB_TOL = 1e-9


def _frozen(a: ArrayLike, ndim: int) -> NDArray:
    a = np.array(a, dtype=float, ndmin=ndim)
    a.flags.writeable = False
    return a


@dataclass(frozen=True, eq=False)
class SingleDist:
    values: NDArray
    probs: NDArray

    def __post_init__(self):
        values = _frozen(self.values, 1)
        probs = _frozen(self.probs, 1)
        if values.ndim != 1 or values.shape != probs.shape or values.size == 0:
            raise ValueError("values and probs must be nonempty 1-d arrays of equal length")
        if np.any(values < 0) or np.any(np.diff(values) <= 0):
            raise ValueError("values must be nonnegative and strictly increasing")
        if np.any(probs <= 0):
            raise ValueError("probs must be positive")
        if abs(math.fsum(probs.tolist()) - 1.0) > PROB_TOL:
            raise ValueError("probs must sum to 1")
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "probs", probs)

    @classmethod
    def from_pairs(cls, values: ArrayLike, weights: ArrayLike) -> "SingleDist":
        """Build from unsorted, possibly repeated values with nonnegative weights."""
        values = np.asarray(values, dtype=float).reshape(-1)
        weights = np.asarray(weights, dtype=float).reshape(-1)
        keep = weights > 0
        uniq, inv = np.unique(values[keep], return_inverse=True)
        w = np.zeros(uniq.size)
        np.add.at(w, inv, weights[keep])
        return cls(uniq, w / math.fsum(w.tolist()))

    @classmethod
    def from_samples(cls, samples: ArrayLike) -> "SingleDist":
        samples = np.asarray(samples, dtype=float).reshape(-1)
        return cls.from_pairs(samples, np.ones_like(samples))

    @classmethod
    def point(cls, v: float) -> "SingleDist":
        return cls([v], [1.0])

    def tail(self) -> NDArray:
        """``P(V >= values[k])`` for every support index ``k``."""
        p = self.probs.tolist()
        return np.array([math.fsum(p[k:]) for k in range(len(p))])

    def scaled(self, factor: float) -> "SingleDist":
        return SingleDist(self.values * factor, self.probs)

    def __eq__(self, other):
        return (isinstance(other, SingleDist) and np.array_equal(self.values, other.values)
                and np.array_equal(self.probs, other.probs))


@dataclass(frozen=True, eq=False)
class ProductDist:
    items: tuple[SingleDist, ...]

    def __post_init__(self):
        items = tuple(self.items)
        if len(items) < 1:
            raise ValueError("a product distribution needs at least one item")
        object.__setattr__(self, "items", items)

    @property
    def n(self) -> int:
        return len(self.items)

    @property
    def support_size(self) -> int:
        return math.prod(len(d.values) for d in self.items)

    def marginal(self, idx: Sequence[int]) -> "ProductDist":
        return ProductDist(tuple(self.items[i] for i in idx))

    def scaled(self, factor: float) -> "ProductDist":
        return ProductDist(tuple(d.scaled(factor) for d in self.items))

    def __eq__(self, other):
        return isinstance(other, ProductDist) and self.items == other.items


@dataclass(frozen=True, eq=False)
class JointDist:
    types: NDArray
    probs: NDArray

    def __post_init__(self):
        types = _frozen(self.types, 2)
        probs = _frozen(self.probs, 1)
        if types.ndim != 2 or types.shape[0] != probs.shape[0] or probs.size == 0:
            raise ValueError("types must be (T, n) with one probability per type")
        if np.any(types < 0):
            raise ValueError("values must be nonnegative")
        if np.any(probs <= 0):
            raise ValueError("probs must be positive")
        if abs(math.fsum(probs.tolist()) - 1.0) > PROB_TOL:
            raise ValueError("probs must sum to 1")
        if np.unique(types, axis=0).shape[0] != types.shape[0]:
            raise ValueError("types must be distinct")
        object.__setattr__(self, "types", types)
        object.__setattr__(self, "probs", probs)

    @classmethod
    def from_pairs(cls, types: ArrayLike, weights: ArrayLike) -> "JointDist":
        """Merge repeated types and normalize nonnegative weights."""
        types = np.asarray(types, dtype=float)
        weights = np.asarray(weights, dtype=float).reshape(-1)
        keep = weights > 0
        uniq, inv = np.unique(types[keep], axis=0, return_inverse=True)
        w = np.zeros(uniq.shape[0])
        np.add.at(w, inv.reshape(-1), weights[keep])
        return cls(uniq, w / math.fsum(w.tolist()))

    @classmethod
    def point(cls, v: ArrayLike) -> "JointDist":
        return cls(np.asarray(v, dtype=float)[None, :], [1.0])

    @property
    def n(self) -> int:
        return self.types.shape[1]

    def __len__(self) -> int:
        return self.types.shape[0]

    def scaled(self, factor: float) -> "JointDist":
        return JointDist(self.types * factor, self.probs)

    def restrict(self, mask: NDArray) -> tuple["JointDist", float]:
        """Condition on the types selected by ``mask``; returns ``(F|A, F(A))``."""
        mask = np.asarray(mask, dtype=bool)
        mass = math.fsum(self.probs[mask].tolist())
        if not mask.any() or mass <= 0:
            raise ZeroMass("conditioning event has zero probability")
        return JointDist(self.types[mask], self.probs[mask] / mass), mass

    def __eq__(self, other):
        return (isinstance(other, JointDist) and np.array_equal(self.types, other.types)
                and np.array_equal(self.probs, other.probs))


@dataclass(frozen=True)
class EuRegion:
    """Types with at most one coordinate strictly above ``H``."""
    H: float
    n: int

    def __post_init__(self):
        if self.H < 0:
            raise ValueError("H must be nonnegative")


def expand(F: ProductDist, limit: int = DEFAULT_LIMIT) -> JointDist:
    """Explicit joint of a product distribution, types in lexicographic order."""
    if isinstance(F, JointDist):
        return F
    size = F.support_size
    if size > limit:
        raise SupportTooLarge(f"product support has {size} types, limit is {limit}")
    grids = np.meshgrid(*[d.values for d in F.items], indexing="ij")
    pgrids = np.meshgrid(*[d.probs for d in F.items], indexing="ij")
    types = np.stack([g.reshape(-1) for g in grids], axis=1)
    probs = np.prod(np.stack([g.reshape(-1) for g in pgrids], axis=1), axis=1)
    return JointDist(types, probs / math.fsum(probs.tolist()))


def product_joint(F: JointDist, G: JointDist, limit: int = DEFAULT_LIMIT) -> JointDist:
    """Independent product of two joints; items of ``F`` come first."""
    size = len(F) * len(G)
    if size > limit:
        raise SupportTooLarge(f"product support has {size} types, limit is {limit}")
    types = np.hstack([np.repeat(F.types, len(G), axis=0), np.tile(G.types, (len(F), 1))])
    probs = np.outer(F.probs, G.probs).reshape(-1)
    return JointDist(types, probs / math.fsum(probs.tolist()))


def eu_mask(types: ArrayLike, H: float) -> NDArray:
    types = np.atleast_2d(np.asarray(types, dtype=float))
    return (types > H).sum(axis=1) <= 1


def eu_contains(v: ArrayLike, region: EuRegion) -> bool:
    v = np.asarray(v, dtype=float)
    if v.shape != (region.n,):
        raise DimensionMismatch(f"type has shape {v.shape}, region has n={region.n}")
    return bool(np.count_nonzero(v > region.H) <= 1)


def condition_eu(F: ProductDist, region: EuRegion,
                 limit: int = DEFAULT_LIMIT) -> tuple[JointDist, float]:
    """Restrict ``F`` to the exclusively-unbounded region and renormalize."""
    J = expand(F, limit)
    if J.n != region.n:
        raise DimensionMismatch(f"distribution has {J.n} items, region has n={region.n}")
    return J.restrict(eu_mask(J.types, region.H))


def sample_many(F: ProductDist, size: int, rng: np.random.Generator) -> NDArray:
    """``size`` independent types, each item drawn by inverse CDF."""
    out = np.empty((size, F.n))
    for i, d in enumerate(F.items):
        cdf = np.cumsum(d.probs)
        cdf[-1] = 1.0
        idx = np.searchsorted(cdf, rng.random(size), side="right")
        out[:, i] = d.values[np.minimum(idx, len(d.values) - 1)]
    return out


def sample(F: ProductDist, rng: np.random.Generator) -> NDArray:
    return sample_many(F, 1, rng)[0]


def compute_H(n: int, R: float, eps: float) -> float:
    """Smallest admissible tail threshold ``2 n (n-1) R / eps``."""
    if n < 2 or not (0 < eps < 1) or not (R > 0):
        raise ValueError("need n >= 2, 0 < eps < 1 and R > 0")
    return 2 * n * (n - 1) * R / eps
