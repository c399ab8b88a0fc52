"""Optimal mechanism for a finite type space by linear programming.

Variables are one outcome ``(x_t; p_t)`` per support type ``t``. The LP
maximizes expected payment subject to pairwise incentive compatibility and
individual rationality. It has ``T**2`` constraints, so it is meant for
desk-scale instances only.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp
from scipy.optimize import linprog

from menusize.core import Menu
from menusize.dist import JointDist, ProductDist, expand
from menusize.errors import GuardExceeded, SolverFailure

DEFAULT_GUARD = 2000
FEAS_TOL = 1e-9
DEDUP_TOL = 1e-9


class LpStatus(enum.Enum):
    OPTIMAL = "Optimal"
    INFEASIBLE = "Infeasible"
    NUMERICAL_FAILURE = "NumericalFailure"


@dataclass(frozen=True)
class LpSolution:
    menu: Menu
    objective: float
    status: LpStatus
    message: str = ""


def _constraints(types: np.ndarray):
    T, n = types.shape
    nx = T * n
    # IC row (t, s): sum_i t_i (x_{s,i} - x_{t,i}) + p_t - p_s <= 0, for s != t
    t_idx, s_idx = np.nonzero(~np.eye(T, dtype=bool))
    m = t_idx.size
    rows = np.arange(m)
    r_x = np.repeat(rows, n)
    i_rep = np.tile(np.arange(n), m)
    coef = types[np.repeat(t_idx, n), i_rep]
    data = [coef, -coef, np.ones(m), -np.ones(m)]
    ri = [r_x, r_x, rows, rows]
    ci = [np.repeat(s_idx, n) * n + i_rep, np.repeat(t_idx, n) * n + i_rep,
          nx + t_idx, nx + s_idx]
    # IR row t: -sum_i t_i x_{t,i} + p_t <= 0
    ir_rows = m + np.repeat(np.arange(T), n)
    data += [-types.reshape(-1), np.ones(T)]
    ri += [ir_rows, m + np.arange(T)]
    ci += [np.arange(nx), nx + np.arange(T)]
    A = sp.csr_matrix((np.concatenate(data), (np.concatenate(ri), np.concatenate(ci))),
                      shape=(m + T, nx + T))
    return A, np.zeros(m + T)


def opt_menu_lp(F, guard: int = DEFAULT_GUARD) -> LpSolution:
    """Solve the revenue LP; the returned menu has one entry per type plus zero."""
    if isinstance(F, ProductDist):
        F = expand(F, limit=guard)
    T, n = F.types.shape
    if T > guard:
        raise GuardExceeded(f"{T} types exceeds the LP guard of {guard}")
    A, b = _constraints(F.types)
    c = np.concatenate([np.zeros(T * n), -F.probs])
    bounds = [(0.0, 1.0)] * (T * n) + [(None, None)] * T
    res = linprog(c, A_ub=A, b_ub=b, bounds=bounds, method="highs-ds",
                  options={"primal_feasibility_tolerance": FEAS_TOL,
                           "dual_feasibility_tolerance": FEAS_TOL})
    if res.status == 2:
        return LpSolution(Menu.zero(n), math.nan, LpStatus.INFEASIBLE, res.message)
    if res.status != 0:
        return LpSolution(Menu.zero(n), math.nan, LpStatus.NUMERICAL_FAILURE, res.message)

    x = np.clip(res.x[:T * n].reshape(T, n), 0.0, 1.0)
    p = res.x[T * n:].copy()
    if np.any(p < -1e-7):
        return LpSolution(Menu.zero(n), math.nan, LpStatus.NUMERICAL_FAILURE,
                          f"negative payment {p.min():.3g} in LP optimum")
    p = np.maximum(p, 0.0)
    p[p < 1e-9] = 0.0
    x[x < 1e-12] = 0.0
    x[x > 1 - 1e-12] = 1.0
    allocs, prices = _dedup(x, p)
    objective = math.fsum((F.probs * p).tolist())
    return LpSolution(Menu.from_arrays(allocs, prices), objective, LpStatus.OPTIMAL, res.message)


def _dedup(x: np.ndarray, p: np.ndarray):
    keep_x, keep_p = [], []
    for k in range(len(p)):
        if any(abs(p[k] - q) <= DEDUP_TOL and np.all(np.abs(x[k] - y) <= DEDUP_TOL)
               for y, q in zip(keep_x, keep_p)):
            continue
        keep_x.append(x[k])
        keep_p.append(p[k])
    return np.array(keep_x), np.array(keep_p)


def rev_opt(F, guard: int = DEFAULT_GUARD) -> float:
    """Optimal revenue ``Rev(F)`` of a finite joint distribution."""
    sol = opt_menu_lp(F, guard)
    if sol.status is not LpStatus.OPTIMAL:
        raise SolverFailure(f"LP status {sol.status.value}: {sol.message}")
    return sol.objective
