"""Joint-constraint enumeration and an exact small-LP solver.

``lp_solve`` maximizes ``c @ x`` subject to ``A x <= b`` with free ``x``. It
works on the dual standard form

    minimize b @ y   subject to  A.T @ y = c,  y >= 0

which has one row per primal variable (at most nine here) against ~1000
columns, so a dense tableau stays tiny. Pivoting follows Bland's rule; the
primal point is recovered from the simplex multipliers of the optimal basis.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from itertools import combinations

import numpy as np

from .asymptotic import CoefficientSet, LinearBound, error_form, v1_form, v2_form
from .channel import BasisStatistics
from .fluctuation import BoundResult, FluctuationConfig, NoEventsError

_PIVOT_TOL = 1e-11
_COST_TOL = 1e-12
_MAX_PIVOTS = 10_000


class LPError(RuntimeError):
    pass


@dataclass(frozen=True)
class ConstraintSystem:
    """One-sided rows ``A x <= b`` over the labelled variables, plus ``E x = e``."""

    labels: tuple
    A: np.ndarray
    b: np.ndarray
    E: np.ndarray
    e: np.ndarray
    n_abs: int

    @property
    def n_vars(self) -> int:
        return len(self.labels)

    def violation(self, x) -> float:
        """Largest constraint violation, each row measured relative to its bound."""
        x = np.asarray(x, dtype=float)
        scale = np.where(self.b > 0, self.b, 1.0)
        v = float(np.max((self.A @ x - self.b) / scale, initial=-math.inf))
        if self.E.size:
            v = max(v, float(np.max(np.abs(self.E @ x - self.e))))
        return v


def subsets(k: int):
    """Nonempty index subsets of ``range(k)``, by size then lexicographically."""
    for size in range(1, k + 1):
        yield from combinations(range(k), size)


def enumerate_constraints(weights: dict, n: float, include_equality: bool = False) -> ConstraintSystem:
    """``|sum_{k in J} w_k x_k| <= n sqrt(sum_{k in J} w_k)`` for every nonempty J.

    Variables with zero weight are left out.
    """
    labels = tuple(k for k, w in weights.items() if w > 0)
    w = np.array([weights[k] for k in labels], dtype=float)
    K = len(labels)
    rows, rhs = [], []
    for J in subsets(K):
        r = np.zeros(K)
        r[list(J)] = w[list(J)]
        bound = n * math.sqrt(w[list(J)].sum())
        rows += [r, -r]
        rhs += [bound, bound]
    A = np.array(rows).reshape(-1, K)
    if include_equality:
        E, e = w.reshape(1, K), np.zeros(1)
    else:
        E, e = np.zeros((0, K)), np.zeros(0)
    return ConstraintSystem(labels, A, np.array(rhs), E, e, n_abs=len(rows) // 2)


def _revised(M: np.ndarray, rhs: np.ndarray, cost: np.ndarray, basis: list) -> list:
    """Bland-rule revised simplex for ``min cost@y, M y = rhs, y >= 0`` from a feasible basis.

    The basis matrix is refactorized every iteration, so rounding does not
    accumulate across pivots the way it does in an updated tableau.
    """
    for _ in range(_MAX_PIVOTS):
        B = M[:, basis]
        xB = np.linalg.solve(B, rhs)
        y = np.linalg.solve(B.T, cost[basis])
        red = cost - y @ M
        red[basis] = 0.0
        entering = np.flatnonzero(red < -_COST_TOL)
        if entering.size == 0:
            return basis
        j = int(entering[0])
        d = np.linalg.solve(B, M[:, j])
        rows = np.flatnonzero(d > _PIVOT_TOL * max(1.0, np.abs(d).max()))
        if rows.size == 0:
            raise LPError("dual unbounded: primal infeasible")
        ratios = np.maximum(xB[rows], 0.0) / d[rows]
        best = ratios.min()
        ties = rows[ratios <= best + 1e-14 * max(1.0, best)]
        i = int(min(ties, key=lambda r: basis[r]))
        basis[i] = j
    raise LPError("pivot limit reached")


def _solve_scaled(A: np.ndarray, b: np.ndarray, c: np.ndarray) -> np.ndarray:
    """Optimal primal point of ``max c@x, A x <= b`` via the dual standard form."""
    n, m = A.shape[1], A.shape[0]
    M = A.T.copy()
    rhs = c.copy()
    flip = rhs < 0
    M[flip] *= -1
    rhs[flip] *= -1
    # phase 1 on [M | I] with artificials m .. m+n-1
    M1 = np.hstack([M, np.eye(n)])
    cost1 = np.concatenate([np.zeros(m), np.ones(n)])
    basis = _revised(M1, rhs, cost1, list(range(m, m + n)))
    xB = np.linalg.solve(M1[:, basis], rhs)
    if cost1[basis] @ xB > 1e-9 * rhs.sum():
        raise LPError("dual infeasible: primal unbounded")
    # swap zero-level artificials for real columns; a row with no candidate is redundant
    keep = list(range(n))
    for pos in range(n):
        if basis[pos] < m:
            continue
        B = M1[:, basis]
        row = np.linalg.solve(B.T, np.eye(n)[pos]) @ M
        cand = [j for j in np.flatnonzero(np.abs(row) > _PIVOT_TOL) if j not in basis]
        if cand:
            basis[pos] = int(cand[0])
        else:
            keep.remove(pos)
    rows = keep
    basis = [basis[i] for i in rows] if len(rows) < n else basis
    if len(rows) < n:
        # drop redundant equations of the dual (dependent primal variables)
        Mr, rr = M[rows], rhs[rows]
    else:
        Mr, rr = M, rhs
    basis = _revised(Mr, rr, b.astype(float), basis)
    x, *_ = np.linalg.lstsq(A[basis], b[basis], rcond=None)
    return x


def lp_solve(objective, system: ConstraintSystem, sense: str = "max"):
    """Exact optimum of a linear objective over ``system``; returns ``(optimum, x)``."""
    c = np.asarray(objective, dtype=float)
    if c.size != system.n_vars:
        raise ValueError("objective length does not match the number of variables")
    if sense not in ("max", "min"):
        raise ValueError("sense must be 'max' or 'min'")
    if system.n_vars == 0:
        return 0.0, np.zeros(0)
    A = system.A
    b = system.b
    if system.E.size:
        A = np.vstack([A, system.E, -system.E])
        b = np.concatenate([b, system.e, -system.e])
    # rows to unit right-hand side, then columns to unit max magnitude
    row_mag = np.abs(A).max(axis=1)
    row_scale = np.where(b > 0, 1.0 / np.where(b > 0, b, 1.0), 1.0 / np.where(row_mag > 0, row_mag, 1.0))
    A1 = A * row_scale[:, None]
    b1 = b * row_scale
    col_mag = np.abs(A1).max(axis=0)
    col_scale = np.where(col_mag > 0, 1.0 / np.where(col_mag > 0, col_mag, 1.0), 1.0)
    A2 = A1 * col_scale
    # rows with zero right-hand side (the equality) are re-equilibrated after the column pass
    zero = b1 == 0
    if zero.any():
        mag = np.abs(A2[zero]).max(axis=1)
        A2[zero] /= np.where(mag > 0, mag, 1.0)[:, None]
    c2 = (c if sense == "max" else -c) * col_scale
    if not np.any(c2):
        return 0.0, np.zeros(system.n_vars)
    # the optimal point does not depend on the objective's scale; tolerances do
    u = _solve_scaled(A2, b1, c2 / np.abs(c2).max())
    x = u * col_scale
    return float(c @ x), x


# -- full-LP bounds -----------------------------------------------------------

def _lp_extremum(form: LinearBound, values: dict, counts: dict, n: float, sense: str,
                 include_equality: bool, zero_fallback: bool, flags: list) -> float:
    """Optimum of ``sum_plus c v d - sum_minus c v d`` over the full nine-source system."""
    weights, obj, extra = {}, {}, 0.0
    sign = 1 if sense == "max" else -1
    coef = {lr: c for lr, c in form.plus.items()}
    for lr, c in form.minus.items():
        coef[lr] = coef.get(lr, 0.0) - c
    for lr in values:
        N, v = counts[lr], values[lr]
        c = coef.get(lr, 0.0)
        if N <= 0:
            if c != 0:
                raise NoEventsError(f"source {lr} was never sent")
            continue
        if v <= 0:
            if zero_fallback and c != 0:
                flags.append(f"zero_count:{lr}")
                extra += max(sign * c * n * n / N, 0.0) * sign
            continue
        weights[lr] = N * v
        obj[lr] = c * v
    system = enumerate_constraints(weights, n, include_equality)
    opt, _ = lp_solve([obj[lr] for lr in system.labels], system, sense=sense)
    return opt + extra


def bounds_via_lp(stats: BasisStatistics, coeff: CoefficientSet, cfg: FluctuationConfig,
                  include_equality: bool | None = None) -> BoundResult:
    """s11 and e11 bounds by linear programming over all 2^9 - 1 joint constraints."""
    eq = cfg.lp_equality if include_equality is None else include_equality
    flags: list = []
    s = []
    for form in (v1_form(coeff), v2_form(coeff)):
        dev = _lp_extremum(form, stats.S, stats.N, cfg.n_delta, "min", eq, False, flags)
        s.append(form.evaluate(stats.S) + dev / form.denom)
    raw, branch = (s[0], "v1") if s[0] > s[1] else (s[1], "v2")
    s11 = max(raw, 0.0)
    if raw < 0:
        flags.append("s11_clamped")
    if s11 <= 0:
        flags.append("s11_zero")
        e11 = 1.0
    else:
        form = error_form(coeff, s11)
        dev = _lp_extremum(form, stats.T, stats.N, cfg.n_tau, "max", eq, True, flags)
        e11 = min(1.0, max(0.0, form.evaluate(stats.T) + dev / form.denom))
    return BoundResult(s11, e11, "lp", branch, tuple(dict.fromkeys(flags)), raw)
