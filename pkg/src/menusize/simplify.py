"""Menu simplification: exclusivity, trimming, discretization, and the full chain.

All transformations take and return finite :class:`~menusize.core.Menu`
objects. Threshold tests (``price > E``, ``alloc > 0``) treat values within
``THRESH_TOL`` of the threshold as lying on it, so coincidences produced by
floating-point arithmetic are resolved the same way every time.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, asdict
from typing import Optional

import numpy as np

from menusize.core import DEFAULT_TOL, Menu, choose, menu_size, revenue_exact
from menusize.dist import (DEFAULT_LIMIT, EuRegion, JointDist, ProductDist, SingleDist,
                           compute_H, condition_eu, eu_mask, expand)
from menusize.errors import PreconditionError, SolverFailure
from menusize.myerson import myerson_price, posted_price_menu
from menusize.oracle import DEFAULT_GUARD, LpStatus, opt_menu_lp

THRESH_TOL = 1e-9


def _expensive(prices, E: float):
    return np.asarray(prices) > E + THRESH_TOL


def _positive(allocs):
    return np.asarray(allocs) > THRESH_TOL


def compute_E_exclusive(n: int, H: float, eps: float) -> float:
    """Expensive-price threshold ``4 (n-1) H / eps**2``."""
    if n < 2 or not (0 < eps < 1) or H < 0:
        raise ValueError("need n >= 2, 0 < eps < 1 and H >= 0")
    return 4 * (n - 1) * H / eps**2


def trim_threshold(n: int, H: float, eps: float) -> float:
    """Smallest ``E`` accepted by :func:`trim_expensive`."""
    return max(n * H + 2, ((n - 1) * H + 1) / eps)


def is_e_exclusive(menu: Menu, E: float) -> bool:
    """Every entry priced strictly above ``E`` allocates at most one item."""
    exp = menu.prices > E
    return bool(np.all((menu.allocs[exp] > 0).sum(axis=1) <= 1))


def count_expensive(menu: Menu, E: float) -> int:
    return int(_expensive(menu.prices, E).sum())


def count_cheap(menu: Menu, E: float) -> int:
    """Entries priced at most ``E``, not counting the zero entry."""
    return int((~_expensive(menu.prices, E) & ~menu.zero_mask()).sum())


def restrict_to_chosen(menu: Menu, F: JointDist, tol: float = DEFAULT_TOL) -> Menu:
    """Keep the zero entry and every entry some support type chooses."""
    chosen = np.zeros(len(menu), dtype=bool)
    chosen[choose(menu, F.types, tol)] = True
    return menu.subset(chosen | menu.zero_mask())


def make_exclusive(menu: Menu, H: float, eps: float, E: Optional[float] = None) -> Menu:
    """Split every expensive entry into single-item entries at a ``(1 - eps/2)`` discount.

    ``E`` defaults to :func:`compute_E_exclusive`; any larger threshold is
    also admissible.
    """
    n = menu.n
    E_min = compute_E_exclusive(n, H, eps)
    if E is None:
        E = E_min
    elif E < E_min * (1 - 1e-12):
        raise PreconditionError(f"E={E} is below the admissible threshold {E_min}")
    exp = _expensive(menu.prices, E)
    allocs = [menu.allocs[~exp]]
    prices = [menu.prices[~exp]]
    for x, p in zip(menu.allocs[exp], menu.prices[exp]):
        allocs.append(np.diag(x))
        prices.append(np.full(n, (1 - eps / 2) * p))
    return Menu.from_arrays(np.vstack(allocs), np.concatenate(prices))


@dataclass(frozen=True)
class TrimRecord:
    item: int
    s: float
    b: float
    c: Optional[float]
    kept_form: str  # "dropped", "z_i_only" or "z_and_o"
    choosers: tuple[int, ...] = ()


@dataclass(frozen=True)
class TrimReport:
    records: tuple[TrimRecord, ...]
    expensive_before: int
    expensive_after: int
    cheap_before: int
    cheap_after: int

    def to_dict(self) -> dict:
        d = asdict(self)
        for r in d["records"]:
            r.pop("choosers")
        return d


def trim_expensive(menu: Menu, F: JointDist, H: float, E: float, eps: float,
                   tol: float = DEFAULT_TOL) -> tuple[Menu, TrimReport]:
    """Replace the expensive entries for each item by at most two entries.

    For item ``i`` the expensive entries allocating it act like a base
    outcome ``(s_i; b_i)`` followed by a one-dimensional auction for the
    remaining ``1 - s_i`` probability; that auction is replaced by its
    optimal posted price ``c_i``, and both resulting entries get an additive
    discount of ``(n-1) H + 1``.
    """
    n = menu.n
    if n < 2 or not (0 < eps < 1):
        raise PreconditionError("need n >= 2 and 0 < eps < 1")
    if E < trim_threshold(n, H, eps) - THRESH_TOL:
        raise PreconditionError(f"E={E} below max(nH+2, ((n-1)H+1)/eps)={trim_threshold(n, H, eps)}")
    if not np.all(eu_mask(F.types, H)):
        raise PreconditionError("F is not supported in the exclusively-unbounded region")
    exp_all = _expensive(menu.prices, E)
    if np.any(_positive(menu.allocs[exp_all]).sum(axis=1) > 1):
        raise PreconditionError("menu is not E-exclusive")

    expensive_before = int(exp_all.sum())
    cheap_before = count_cheap(menu, E)

    M = restrict_to_chosen(menu, F, tol)
    pick = choose(M, F.types, tol)
    exp = _expensive(M.prices, E)
    discount = (n - 1) * H + 1
    records = []
    new_allocs, new_prices = [], []
    for i in range(n):
        in_Mi = exp & _positive(M.allocs[:, i])
        orig_Mi = exp_all & _positive(menu.allocs[:, i])
        if not in_Mi.any():
            if orig_Mi.any():
                records.append(TrimRecord(i, math.nan, math.nan, None, "dropped"))
            continue
        W = np.flatnonzero(in_Mi[pick])
        s = float(M.allocs[in_Mi, i].min())
        b = float(M.prices[in_Mi].min())
        e_i = np.zeros(n)
        if s >= 1.0 - THRESH_TOL:
            e_i[i] = 1.0
            new_allocs.append(e_i)
            new_prices.append(b)
            records.append(TrimRecord(i, s, b, None, "z_i_only", tuple(W.tolist())))
            continue
        alpha = F.types[W, i] * (1 - s)
        cont = SingleDist.from_pairs(alpha, F.probs[W])
        c = myerson_price(cont).price
        z = e_i.copy()
        z[i] = s
        o = e_i.copy()
        o[i] = 1.0
        new_allocs += [z, o]
        new_prices += [b - discount, c + b - discount]
        records.append(TrimRecord(i, s, b, c, "z_and_o", tuple(W.tolist())))

    cheap = ~exp
    allocs = np.vstack([M.allocs[cheap]] + [a[None, :] for a in new_allocs])
    prices = np.concatenate([M.prices[cheap], np.array(new_prices, dtype=float)])
    out = Menu.from_arrays(allocs, prices)
    report = TrimReport(tuple(records), expensive_before, count_expensive(out, E),
                        cheap_before, count_cheap(out, E))
    return out, report


def round_down(r, delta: float):
    """Round down to the ``delta``-grid; ``delta == 0`` is the identity.

    Values within a relative ``1e-9`` grid step below a grid point snap to it.
    """
    if delta == 0:
        return r
    if delta < 0:
        raise ValueError("delta must be nonnegative")
    k = np.floor(np.asarray(r, dtype=float) / delta + 1e-9)
    out = np.minimum(k * delta, r)
    return float(out) if np.ndim(out) == 0 else out


@dataclass(frozen=True)
class GridParams:
    X: int
    P: int
    chi: float
    psi: float
    E: float
    H: float
    eps: float

    def cheap_bound(self, n: int) -> int:
        """Number of grid cells, an upper bound on discretized cheap entries."""
        return n * (self.X + 1) ** (n - 1) * (self.P + 1)


def grid_params(n: int, H: float, E: float, eps: float) -> GridParams:
    if not (0 < eps < 1):
        raise ValueError("need 0 < eps < 1")
    X = max(1, math.ceil(n * H / eps**2))
    P = max(1, math.ceil(n * (1 - eps) * E / eps**2))
    return GridParams(X, P, 1 / X, (1 - eps) * E / P if E > 0 else 0.0, E, H, eps)


def on_grid(r, delta: float, atol: float = 1e-9) -> bool:
    if delta == 0:
        return True
    r = np.asarray(r, dtype=float)
    return bool(np.all(np.abs(r - delta * np.rint(r / delta)) <= atol))


def grid_member(alloc, price: float, grid: GridParams, atol: float = 1e-9) -> bool:
    """True if some coordinate is free and the rest plus the price are on the grid."""
    alloc = np.asarray(alloc, dtype=float)
    if not on_grid(price, grid.psi, atol):
        return False
    return any(on_grid(np.delete(alloc, i), grid.chi, atol) for i in range(alloc.size))


def discretize_cheap(menu: Menu, H: float, E: float, eps: float) -> Menu:
    """Round cheap entries onto a grid in all coordinates but one.

    Each cheap entry spawns ``n`` variants, one per unrounded coordinate,
    with the discounted price rounded down; within a grid cell only the
    variant with the largest free coordinate is kept. Expensive entries are
    only discounted by ``(1 - eps)``.
    """
    n = menu.n
    g = grid_params(n, H, E, eps)
    exp = _expensive(menu.prices, E)
    C = menu.allocs[~exp]
    rounded = round_down(C, g.chi)
    price = round_down((1 - eps) * menu.prices[~exp], g.psi)
    price_key = np.rint(price / g.psi).astype(np.int64) if g.psi > 0 else price
    grid_key = np.rint(rounded / g.chi).astype(np.int64)
    cells: dict = {}
    for k in range(C.shape[0]):
        for i in range(n):
            key = (i, tuple(np.delete(grid_key[k], i).tolist()), price_key[k].item())
            xi = C[k, i]
            if key not in cells or xi > cells[key][0][i]:
                a = rounded[k].copy()
                a[i] = xi
                cells[key] = (a, price[k])
    allocs = [a for a, _ in cells.values()] + list(menu.allocs[exp])
    prices = [p for _, p in cells.values()] + list((1 - eps) * menu.prices[exp])
    return Menu.from_arrays(np.array(allocs).reshape(-1, n), np.array(prices, dtype=float))


def discounted_expensive_mask(out: Menu, before: Menu, E: float, eps: float) -> np.ndarray:
    """Rows of ``discretize_cheap(before, ...)`` that are discounted expensive entries.

    The discount may bring such an entry below ``E``, so the output alone
    does not tell which entries were rounded onto the grid.
    """
    exp = _expensive(before.prices, E)
    keys = {(tuple(a), p) for a, p in zip(before.allocs[exp].tolist(),
                                          ((1 - eps) * before.prices[exp]).tolist())}
    return np.array([(tuple(a), p) in keys for a, p in zip(out.allocs.tolist(), out.prices.tolist())],
                    dtype=bool)


@dataclass
class PipelineDiagnostics:
    n: int
    eps: float
    eps_tilde: Optional[float] = None
    scale: float = 1.0
    R: Optional[float] = None
    H: Optional[float] = None
    E: Optional[float] = None
    grid: Optional[GridParams] = None
    eu_mass: Optional[float] = None
    start: str = ""
    stage_revenue: dict = field(default_factory=dict)
    entry_counts: dict = field(default_factory=dict)
    trim: Optional[TrimReport] = None
    size_bound: Optional[int] = None

    def to_dict(self) -> dict:
        d = {k: v for k, v in self.__dict__.items() if k not in ("grid", "trim")}
        d["grid"] = asdict(self.grid) if self.grid else None
        d["trim"] = self.trim.to_dict() if self.trim else None
        return d


def _chain(M0: Menu, J: JointDist, H: float, E: float, eps_t: float,
           diag: PipelineDiagnostics, unit: float) -> Menu:
    M1 = make_exclusive(M0, H, eps_t, E=E)
    M2, report = trim_expensive(M1, J, H, E, eps_t)
    M3 = discretize_cheap(M2, H, E, eps_t)
    diag.trim = report
    for name, M in (("start", M0), ("exclusive", M1), ("trimmed", M2)):
        diag.stage_revenue[name] = revenue_exact(M, J) / unit
        diag.entry_counts[name] = {"size": menu_size(M), "expensive": count_expensive(M, E),
                                   "cheap": count_cheap(M, E)}
    # after the discount, classify entries by where they came from
    exp = discounted_expensive_mask(M3, M2, E, eps_t)
    diag.stage_revenue["discretized"] = revenue_exact(M3, J) / unit
    diag.entry_counts["discretized"] = {"size": menu_size(M3), "expensive": int(exp.sum()),
                                        "cheap": int((~exp & ~M3.zero_mask()).sum())}
    return M3


def pipeline(F: ProductDist, eps: float, near_opt_menu: Optional[Menu] = None,
             limit: int = DEFAULT_LIMIT,
             lp_guard: int = DEFAULT_GUARD) -> tuple[Menu, PipelineDiagnostics]:
    """Finite menu with revenue at least ``(1 - eps) Rev(F)`` for a product ``F``.

    Prices of a supplied ``near_opt_menu`` are in the units of ``F``; it
    should be near-optimal for ``F`` conditioned on the region where at most
    one item exceeds ``H`` (reported in the diagnostics, in scaled units).
    Without one, the LP oracle supplies an optimal menu.
    """
    if not (0 < eps < 1):
        raise ValueError("need 0 < eps < 1")
    n = F.n
    diag = PipelineDiagnostics(n=n, eps=eps)
    revs = [myerson_price(d) for d in F.items]
    if n == 1:
        diag.start = "myerson"
        pr = revs[0]
        menu = posted_price_menu(pr.price) if pr.revenue > 0 else Menu.zero(1)
        diag.stage_revenue["final"] = pr.revenue
        return menu, diag
    r_max = max(p.revenue for p in revs)
    if r_max == 0:
        diag.start = "zero"
        diag.stage_revenue["final"] = 0.0
        return Menu.zero(n), diag

    eps_t = eps / 6
    R = (1 - eps_t) ** -5
    scale = R / r_max
    H = compute_H(n, R, eps_t)
    E = max(compute_E_exclusive(n, H, eps_t), trim_threshold(n, H, eps_t))
    diag.eps_tilde, diag.scale, diag.R, diag.H, diag.E = eps_t, scale, R, H, E
    diag.grid = grid_params(n, H, E, eps_t)
    diag.size_bound = diag.grid.cheap_bound(n) + 2 * n

    Fs = F.scaled(scale)
    cond, mass = condition_eu(Fs, EuRegion(H, n), limit)
    diag.eu_mass = mass
    if near_opt_menu is None:
        sol = opt_menu_lp(cond, lp_guard)
        if sol.status is not LpStatus.OPTIMAL:
            raise SolverFailure(f"LP status {sol.status.value}: {sol.message}")
        M0 = sol.menu
        diag.start = "oracle"
    else:
        M0 = near_opt_menu.with_prices(near_opt_menu.prices * scale)
        diag.start = "supplied"

    M3 = _chain(M0, cond, H, E, eps_t, diag, unit=scale)
    out = M3.with_prices(M3.prices / scale)
    full = expand(F, limit)
    diag.stage_revenue["final"] = revenue_exact(out, full)
    diag.entry_counts["final"] = {"size": menu_size(out)}
    return out, diag


def pipeline_correlated(F: JointDist, H: float, eps: float, near_opt_menu: Menu,
                        diagnostics: Optional[PipelineDiagnostics] = None) -> Menu:
    """Simplify a menu for an arbitrary distribution supported where at most one value exceeds ``H``.

    Runs exclusivity, trimming and discretization with ``eps / 5`` each, so
    the result keeps at least ``(1 - eps) Rev_M(F) - eps``.
    """
    n = F.n
    if n < 2 or not (0 < eps < 1):
        raise PreconditionError("need n >= 2 and 0 < eps < 1")
    if not np.all(eu_mask(F.types, H)):
        raise PreconditionError("F is not supported in the exclusively-unbounded region")
    eps_t = eps / 5
    E = max(compute_E_exclusive(n, H, eps_t), trim_threshold(n, H, eps_t))
    diag = diagnostics if diagnostics is not None else PipelineDiagnostics(n=n, eps=eps)
    diag.eps_tilde, diag.H, diag.E, diag.start = eps_t, H, E, "supplied"
    diag.grid = grid_params(n, H, E, eps_t)
    diag.size_bound = diag.grid.cheap_bound(n) + 2 * n
    return _chain(near_opt_menu, F, H, E, eps_t, diag, unit=1.0)
