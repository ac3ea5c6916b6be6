"""Oracle-equivalence and invariant checks with a plain-text pass/fail report.

All randomness is seeded, and the report contains no timings, so reruns
produce byte-identical output.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .asymptotic import g_coefficients
from .channel import ChannelParams, ProtocolParams, fock_yields, simulate
from .fluctuation import FluctuationConfig, asymptotic_bounds, estimate_bounds, theorem1_extremum
from .keyrate import evaluate
from .lp import bounds_via_lp, enumerate_constraints, lp_solve
from .sources import coherent_triple


@dataclass(frozen=True)
class Check:
    name: str
    passed: bool
    detail: str

    def line(self) -> str:
        return f"{'PASS' if self.passed else 'FAIL'} {self.name}: {self.detail}"


def random_theorem1(rng, K: int):
    alpha = rng.uniform(0, 1, K)
    beta = 10 ** rng.uniform(0, 12, K)
    n0 = rng.uniform(0, 10)
    return alpha, beta, n0


def sample_points(n: int, seed: int, d_lo: float = 10.0, d_hi: float = 150.0):
    """Random (channel, protocol) pairs around a typical optimum, distances in ``[d_lo, d_hi]``."""
    rng = np.random.default_rng(seed)
    out = []
    for _ in range(n):
        d = rng.uniform(d_lo, d_hi)
        mu_y = rng.uniform(0.2, 0.5)
        mu_x = mu_y * rng.uniform(0.1, 0.35)
        p_y = rng.uniform(0.3, 0.7)
        p_x = (1 - p_y) * rng.uniform(0.4, 0.9)
        proto = ProtocolParams(mu_x=mu_x, mu_y=mu_y, p_x=p_x, p_y=p_y,
                               pX_given_x=rng.uniform(0.5, 0.9), pX_given_y=rng.uniform(0.01, 0.2))
        out.append((ChannelParams(distance_km=d), proto))
    return out


def check_theorem1(n_per_k: int = 200, seed: int = 1) -> Check:
    rng = np.random.default_rng(seed)
    worst = 0.0
    for K in (2, 3, 4):
        for _ in range(n_per_k):
            a, b, n0 = random_theorem1(rng, K)
            f, _ = theorem1_extremum(a, b, n0)
            opt, _ = lp_solve(a, enumerate_constraints(dict(enumerate(b)), n0))
            worst = max(worst, abs(f - opt) / max(abs(opt), 1e-300))
    return Check("closed form vs simplex", worst <= 1e-9, f"{3 * n_per_k} instances, max rel err {worst:.3e}")


def check_feasibility(n_per_k: int = 200, seed: int = 2) -> Check:
    rng = np.random.default_rng(seed)
    worst = 0.0
    for K in (1, 2, 3, 4):
        for _ in range(n_per_k):
            a, b, n0 = random_theorem1(rng, K)
            _, x = theorem1_extremum(a, b, n0)
            sys_ = enumerate_constraints(dict(enumerate(b)), n0)
            worst = max(worst, sys_.violation(x))
    return Check("extremal point feasible", worst <= 1e-12, f"max relative violation {worst:.3e}")


def check_sqrt_lemma(n: int = 10_000, seed: int = 3) -> Check:
    rng = np.random.default_rng(seed)
    bad = skipped = 0
    for _ in range(n):
        s = rng.uniform(0, 10)
        y1, z1 = rng.uniform(0, s, 2)
        y2, z2 = s - y1, s - z1
        gap = abs(y1 - y2) - abs(z1 - z2)
        if abs(gap) < 1e-9 * s:
            skipped += 1
            continue
        lhs = math.sqrt(y1) + math.sqrt(y2) <= math.sqrt(z1) + math.sqrt(z2)
        bad += lhs != (gap >= 0)
    return Check("square-root exchange lemma", bad == 0, f"{n} quadruples, {bad} mismatches, {skipped} ties skipped")


def check_closed_vs_lp(n: int = 12, seed: int = 4) -> Check:
    cfg = FluctuationConfig()
    worst = 0.0
    for ch, proto in sample_points(n, seed):
        stats = simulate(ch, proto)
        src = coherent_triple(proto.mu_x, proto.mu_y)
        coeff = g_coefficients(src, src)
        for basis in ("Z", "X"):
            imp = estimate_bounds(stats[basis], coeff, cfg, "improved")
            lp = bounds_via_lp(stats[basis], coeff, cfg)
            for u, v in ((imp.s11_lower, lp.s11_lower), (imp.e11_upper, lp.e11_upper)):
                worst = max(worst, abs(u - v) / max(abs(v), 1e-300))
    return Check("closed-form bounds vs full LP", worst <= 1e-9, f"{n} points, max rel diff {worst:.3e}")


def check_orderings(n: int = 12, seed: int = 5) -> Check:
    cfg = FluctuationConfig()
    bad = 0
    for ch, proto in sample_points(n, seed):
        ev_t = evaluate(ch, proto, "traditional", cfg)
        ev_i = evaluate(ch, proto, "improved", cfg)
        for bt, bi in ((ev_t.bounds_Z, ev_i.bounds_Z), (ev_t.bounds_X, ev_i.bounds_X)):
            bad += bt.s11_lower > bi.s11_lower
            bad += bi.e11_upper > bt.e11_upper
        bad += ev_t.rate.R > ev_i.rate.R
    return Check("traditional never beats improved", bad == 0, f"{n} points, {bad} violations")


def check_zero_radius(n: int = 12, seed: int = 6) -> Check:
    cfg = FluctuationConfig(n_delta=0.0, n_tau=0.0)
    worst = 0.0
    for ch, proto in sample_points(n, seed):
        stats = simulate(ch, proto)
        src = coherent_triple(proto.mu_x, proto.mu_y)
        coeff = g_coefficients(src, src)
        for basis in ("Z", "X"):
            ref = asymptotic_bounds(stats[basis], coeff)
            for method in ("traditional", "improved", "lp"):
                b = estimate_bounds(stats[basis], coeff, cfg, method)
                for u, v in ((b.s11_lower, ref.s11_lower), (b.e11_upper, ref.e11_upper)):
                    worst = max(worst, abs(u - v) / max(abs(v), 1e-300))
    return Check("zero radius equals asymptotic", worst <= 1e-12, f"{n} points, max rel diff {worst:.3e}")


def check_validity(n: int = 12, seed: int = 7) -> Check:
    """Bounds computed from expected statistics must bracket the true single-photon values."""
    cfg = FluctuationConfig()
    bad = 0
    for ch, proto in sample_points(n, seed):
        stats = simulate(ch, proto)
        src = coherent_triple(proto.mu_x, proto.mu_y)
        coeff = g_coefficients(src, src)
        for basis in ("Z", "X"):
            true = fock_yields(ch, basis)
            for method in ("asymptotic", "traditional", "improved", "lp"):
                b = estimate_bounds(stats[basis], coeff, cfg, method)
                bad += b.s11_lower > true.s[1, 1] * (1 + 1e-12)
                bad += b.e11_upper < true.e[1, 1] * (1 - 1e-12)
    return Check("bounds bracket true values", bad == 0, f"{n} points, {bad} violations")


CHECKS = (
    check_theorem1,
    check_feasibility,
    check_sqrt_lemma,
    check_closed_vs_lp,
    check_orderings,
    check_zero_radius,
    check_validity,
)


def run_all() -> list:
    return [c() for c in CHECKS]


def report(checks) -> str:
    lines = [c.line() for c in checks]
    n_fail = sum(not c.passed for c in checks)
    lines.append(f"{len(checks) - n_fail}/{len(checks)} checks passed")
    return "\n".join(lines) + "\n"
