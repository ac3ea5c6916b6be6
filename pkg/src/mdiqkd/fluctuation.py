"""Finite-key bounds on s11 and e11.

Observed gains fluctuate around their means as ``<S_lr> = S_lr (1 + delta_lr)``
(and ``<T_lr> = T_lr (1 + tau_lr)``). The *traditional* analysis bounds each
``|delta_lr| <= n / sqrt(N_lr S_lr)`` on its own; the *improved* analysis uses
the joint constraints

    | sum_{lr in J} N_lr S_lr delta_lr | <= n sqrt(sum_{lr in J} N_lr S_lr)   for every nonempty J,

whose optimum over a linear objective of up to four variables has a closed form
(:func:`theorem1_extremum`).
"""
from __future__ import annotations

import math
import statistics
from dataclasses import dataclass, field

import numpy as np

from .asymptotic import CoefficientSet, LinearBound, error_form, v1_form, v2_form
from .channel import BasisStatistics

METHODS = ("asymptotic", "traditional", "improved", "lp")


class NoEventsError(ValueError):
    """A source needed by a bound has no pulses (or no detections) at all."""


@dataclass(frozen=True)
class FluctuationConfig:
    n_delta: float = 5.3
    n_tau: float = 5.3
    epsilon: float = 1e-7
    lp_equality: bool = False

    def __post_init__(self):
        if self.n_delta < 0 or self.n_tau < 0:
            raise ValueError("standard-deviation multipliers must be nonnegative")

    @classmethod
    def from_epsilon(cls, epsilon: float, **kw) -> "FluctuationConfig":
        """Two-sided Gaussian multiplier for failure probability ``epsilon``."""
        n = statistics.NormalDist().inv_cdf(1 - epsilon / 2)
        return cls(n_delta=n, n_tau=n, epsilon=epsilon, **kw)


@dataclass(frozen=True)
class BoundResult:
    s11_lower: float
    e11_upper: float
    method: str
    branch_used: str
    flags: tuple = field(default=())
    s11_raw: float = math.nan


def delta_bound(N: float, S: float, n: float) -> float:
    """Relative fluctuation bound ``n / sqrt(N S)``."""
    if not N * S > 0:
        raise NoEventsError(f"no detection events (N={N}, S={S})")
    return n / math.sqrt(N * S)


# -- closed-form extremum under joint constraints ------------------------------

def theorem1_extremum(alpha, beta, n0: float):
    """Maximum of ``sum alpha_k x_k`` under ``|sum_{k in J} beta_k x_k| <= n0 sqrt(sum_{k in J} beta_k)``.

    Returns ``(f_max, x_star)``; the minimum is ``-f_max`` at ``-x_star``.
    Only proven for up to four variables.
    """
    alpha = np.asarray(alpha, dtype=float)
    beta = np.asarray(beta, dtype=float)
    K = alpha.size
    if not 1 <= K <= 4 or beta.size != K:
        raise ValueError(f"closed form holds for 1 <= K <= 4 variables, got K={K}")
    if np.any(beta <= 0):
        raise ValueError("weights beta must be positive")
    if np.any(alpha < 0):
        raise ValueError("objective coefficients alpha must be nonnegative")
    if n0 < 0:
        raise ValueError("n0 must be nonnegative")
    gamma = alpha / beta
    order = np.argsort(gamma, kind="stable")
    g = gamma[order]
    b = beta[order]
    tails = np.append(np.cumsum(b[::-1])[::-1], 0.0)
    root = np.sqrt(tails)
    # n0 (sqrt(B_k) - sqrt(B_{k+1})) / b_k without the cancellation
    x_sorted = n0 / (root[:-1] + root[1:])
    steps = np.diff(np.concatenate([[0.0], g]))
    f_max = n0 * float(np.sum(steps * root[:-1]))
    x_star = np.empty(K)
    x_star[order] = x_sorted
    return f_max, x_star


# -- shared machinery ----------------------------------------------------------

def _group_extremum(coefs: dict, values: dict, counts: dict, n: float, sign: int,
                    method: str, zero_fallback: bool, flags: list) -> float:
    """Extremum of ``sum_k c_k v_k d_k`` (max for sign=+1, min for sign=-1) over the fluctuations.

    A variable observed with zero events is handled apart from the joint
    constraints: dropped when ``zero_fallback`` is off (deterministic zero),
    otherwise its mean deviation is confined to ``[0, n^2 / N]``.
    """
    active, extra = [], 0.0
    for lr, c in coefs.items():
        if c == 0:
            continue
        N, v = counts[lr], values[lr]
        if N <= 0:
            raise NoEventsError(f"source {lr} was never sent")
        if v <= 0:
            if zero_fallback:
                flags.append(f"zero_count:{lr}")
                dev = c * n * n / N
                extra += max(sign * dev, 0.0) * sign
            continue
        active.append((lr, c * v, N * v))
    if not active:
        return extra
    if method == "traditional":
        return extra + sign * sum(abs(a) * n / math.sqrt(w) for _, a, w in active)
    alpha = np.array([a for _, a, _ in active])
    beta = np.array([w for _, _, w in active])
    if method == "improved" and np.all(alpha >= 0) and alpha.size <= 4:
        f_max, _ = theorem1_extremum(alpha, beta, n)
        return extra + sign * f_max
    # outside the closed form's hypotheses: solve the group's LP exactly
    from .lp import enumerate_constraints, lp_solve

    flags.append("group_lp")
    system = enumerate_constraints({lr: w for lr, _, w in active}, n)
    opt, _ = lp_solve(alpha, system, sense="max" if sign > 0 else "min")
    return extra + opt


def _finite_s11(form: LinearBound, stats: BasisStatistics, n: float, method: str, flags: list) -> float:
    base = form.evaluate(stats.S)
    lo_plus = _group_extremum(form.plus, stats.S, stats.N, n, -1, method, False, flags)
    hi_minus = _group_extremum(form.minus, stats.S, stats.N, n, +1, method, False, flags)
    return base + (lo_plus - hi_minus) / form.denom


def _pick(s1: float, s2: float) -> tuple[float, str]:
    return (s1, "v1") if s1 > s2 else (s2, "v2")


def s11_lower_traditional(stats: BasisStatistics, coeff: CoefficientSet, cfg: FluctuationConfig,
                          flags: list | None = None) -> tuple[float, str, float]:
    """Per-source worst case ``max(s11^(1), s11^(2))``; returns (clamped, branch, raw)."""
    flags = [] if flags is None else flags
    s1 = _finite_s11(v1_form(coeff), stats, cfg.n_delta, "traditional", flags)
    s2 = _finite_s11(v2_form(coeff), stats, cfg.n_delta, "traditional", flags)
    raw, branch = _pick(s1, s2)
    return max(raw, 0.0), branch, raw


def s11_lower_improved(stats: BasisStatistics, coeff: CoefficientSet, cfg: FluctuationConfig,
                       flags: list | None = None) -> tuple[float, str, float]:
    """Joint-constraint bound via the closed form on each sign group."""
    flags = [] if flags is None else flags
    s1 = _finite_s11(v1_form(coeff), stats, cfg.n_delta, "improved", flags)
    s2 = _finite_s11(v2_form(coeff), stats, cfg.n_delta, "improved", flags)
    raw, branch = _pick(s1, s2)
    return max(raw, 0.0), branch, raw


def _e11_from(form: LinearBound, stats: BasisStatistics, n: float, method: str, flags: list) -> float:
    base = form.evaluate(stats.T)
    hi_plus = _group_extremum(form.plus, stats.T, stats.N, n, +1, method, True, flags)
    lo_minus = _group_extremum(form.minus, stats.T, stats.N, n, -1, method, True, flags)
    return base + (hi_plus - lo_minus) / form.denom


def e11_upper_traditional(stats: BasisStatistics, coeff: CoefficientSet, cfg: FluctuationConfig,
                          s11_lower: float, flags: list | None = None) -> float:
    flags = [] if flags is None else flags
    if s11_lower <= 0:
        flags.append("s11_zero")
        return 1.0
    e = _e11_from(error_form(coeff, s11_lower), stats, cfg.n_tau, "traditional", flags)
    return min(1.0, max(0.0, e))


# explicit two-variable forms of the error-gain extrema

def _d_ordered(d1, w1, d2, w2, n):
    """``n d_1 sqrt(w_1 + w_2) + n (d_2 - d_1) sqrt(w_2)`` with ``d_1 <= d_2``."""
    if d2 < d1:
        d1, w1, d2, w2 = d2, w2, d1, w1
    return n * d1 * math.sqrt(w1 + w2) + n * (d2 - d1) * math.sqrt(w2)


def t_plus_upper(stats: BasisStatistics, coeff: CoefficientSet, n_tau: float) -> float:
    """Largest ``T_xx + a0 b0 T_oo`` under the joint xx/oo constraint."""
    T, N = stats.T, stats.N
    a0b0 = coeff.a[0] * coeff.b[0]
    t_hat = T["xx"] + a0b0 * T["oo"]
    return t_hat + _d_ordered(1 / N["xx"], N["xx"] * T["xx"], a0b0 / N["oo"], N["oo"] * T["oo"], n_tau)


def t_minus_lower(stats: BasisStatistics, coeff: CoefficientSet, n_tau: float) -> float:
    """Smallest ``a0 T_ox + b0 T_xo`` under the joint ox/xo constraint."""
    T, N = stats.T, stats.N
    a0, b0 = coeff.a[0], coeff.b[0]
    t_hat = a0 * T["ox"] + b0 * T["xo"]
    return t_hat - _d_ordered(a0 / N["ox"], N["ox"] * T["ox"], b0 / N["xo"], N["xo"] * T["xo"], n_tau)


def t_minus_lower_symmetric(stats: BasisStatistics, coeff: CoefficientSet, n_tau: float) -> float:
    """Same as :func:`t_minus_lower` when ``a_k = b_k`` and ``N_ox = N_xo``."""
    T, N = stats.T, stats.N
    a0 = coeff.a[0]
    t_hat = a0 * T["ox"] + coeff.b[0] * T["xo"]
    return t_hat - n_tau * a0 / N["ox"] * math.sqrt(N["ox"] * T["ox"] + N["xo"] * T["xo"])


def e11_upper_improved(stats: BasisStatistics, coeff: CoefficientSet, cfg: FluctuationConfig,
                       s11_lower: float, flags: list | None = None) -> float:
    flags = [] if flags is None else flags
    if s11_lower <= 0:
        flags.append("s11_zero")
        return 1.0
    for lr in ("xx", "oo", "ox", "xo"):
        if stats.N[lr] <= 0:
            raise NoEventsError(f"source {lr} was never sent")
    if all(stats.T[lr] > 0 for lr in ("xx", "oo", "ox", "xo")):
        num = t_plus_upper(stats, coeff, cfg.n_tau) - t_minus_lower(stats, coeff, cfg.n_tau)
        e = num / (coeff.a[1] * coeff.b[1] * s11_lower)
    else:
        e = _e11_from(error_form(coeff, s11_lower), stats, cfg.n_tau, "improved", flags)
    return min(1.0, max(0.0, e))


# -- one-call front end ----------------------------------------------------------

def asymptotic_bounds(stats: BasisStatistics, coeff: CoefficientSet) -> BoundResult:
    s1 = v1_form(coeff).evaluate(stats.S)
    s2 = v2_form(coeff).evaluate(stats.S)
    raw, branch = _pick(s1, s2)
    s11 = max(raw, 0.0)
    if s11 > 0:
        e11 = min(1.0, max(0.0, error_form(coeff, s11).evaluate(stats.T)))
        flags = ()
    else:
        e11, flags = 1.0, ("s11_zero",)
    return BoundResult(s11, e11, "asymptotic", branch, flags, raw)


def estimate_bounds(stats: BasisStatistics, coeff: CoefficientSet, cfg: FluctuationConfig,
                    method: str = "improved") -> BoundResult:
    """s11 lower and e11 upper bound from one basis' statistics with the chosen method."""
    if not any(stats.S[lr] > 0 for lr in stats.S):
        raise NoEventsError(f"no events: every {stats.basis}-basis yield is zero")
    if method == "asymptotic":
        return asymptotic_bounds(stats, coeff)
    if method == "lp":
        from .lp import bounds_via_lp

        return bounds_via_lp(stats, coeff, cfg)
    flags: list = []
    if method == "traditional":
        s11, branch, raw = s11_lower_traditional(stats, coeff, cfg, flags)
        e11 = e11_upper_traditional(stats, coeff, cfg, s11, flags)
    elif method == "improved":
        s11, branch, raw = s11_lower_improved(stats, coeff, cfg, flags)
        e11 = e11_upper_improved(stats, coeff, cfg, s11, flags)
    else:
        raise ValueError(f"unknown method {method!r}; expected one of {METHODS}")
    if raw < 0:
        flags.append("s11_clamped")
    return BoundResult(s11, e11, method, branch, tuple(dict.fromkeys(flags)), raw)

