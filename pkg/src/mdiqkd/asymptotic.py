"""Closed-form decoy-state bounds on the single-photon-pair yield and error rate.

Each bound is written as a pair of linear forms in the observed gains,
``(sum_lr plus[lr] S_lr - sum_lr minus[lr] S_lr) / denom``, so the finite-key
modules can reuse the same coefficients with fluctuating gains.
"""
from __future__ import annotations

from dataclasses import dataclass

from .sources import SourceTriple, check_decoy_condition


@dataclass(frozen=True)
class LinearBound:
    plus: dict
    minus: dict
    denom: float

    def evaluate(self, values: dict) -> float:
        num = sum(c * values[lr] for lr, c in self.plus.items()) - sum(
            c * values[lr] for lr, c in self.minus.items()
        )
        return num / self.denom


@dataclass(frozen=True)
class CoefficientSet:
    a: tuple  # Alice decoy a_0, a_1, a_2
    ap: tuple  # Alice signal a'_0, a'_1, a'_2
    b: tuple
    bp: tuple
    a_tilde_12: float
    b_tilde_12: float
    a_tilde_02: float
    b_tilde_01: float
    g: dict
    K_a: float
    K_b: float

    def swapped(self) -> "CoefficientSet":
        return _coefficient_set(self.b, self.bp, self.a, self.ap)


def _coefficient_set(a, ap, b, bp) -> CoefficientSet:
    a0, a1, a2 = a
    A0, A1, A2 = ap
    b0, b1, b2 = b
    B0, B1, B2 = bp
    at12 = a1 * A2 - A1 * a2
    bt12 = b1 * B2 - B1 * b2
    at02 = a0 * A2 - A0 * a2
    bt01 = b0 * B1 - B0 * b1
    g_xx = a1 * A2 * b1 * B2 - A1 * a2 * B1 * b2
    g_xy = b1 * b2 * at12
    g_yx = a1 * a2 * bt12
    g = {
        "xx": g_xx,
        "xy": g_xy,
        "yx": g_yx,
        "oy": a0 * g_xy,
        "yo": b0 * g_yx,
        # factored forms: every product is nonnegative under the decoy condition
        "oo": a0 * b2 * at12 * bt01 + b0 * a1 * at02 * bt12,
        "ox": a1 * at02 * bt12 + a0 * B1 * b2 * at12,
        "xo": b0 * a1 * A2 * bt12 + b2 * at12 * bt01,
    }
    return CoefficientSet(
        a=tuple(a), ap=tuple(ap), b=tuple(b), bp=tuple(bp),
        a_tilde_12=at12, b_tilde_12=bt12, a_tilde_02=at02, b_tilde_01=bt01,
        g=g,
        K_a=A1 * B2 / (a1 * b2),
        K_b=A2 * B1 / (a2 * b1),
    )


def g_coefficients(alice: SourceTriple, bob: SourceTriple) -> CoefficientSet:
    for side in (alice, bob):
        if not check_decoy_condition(side.decoy, side.signal):
            raise ValueError("decoy-state condition violated")
    return _coefficient_set(
        alice.decoy.coeffs[:3], alice.signal.coeffs[:3], bob.decoy.coeffs[:3], bob.signal.coeffs[:3]
    )


def _swap_labels(d: dict) -> dict:
    return {lr[::-1]: c for lr, c in d.items()}


def v1_form(coeff: CoefficientSet) -> LinearBound:
    """Linear form of the bound built from every source except xy and yx.

    Written for ``K_a <= K_b``; otherwise Alice and Bob are exchanged, which
    relabels each pair ``lr -> rl``.
    """
    swap = coeff.K_a > coeff.K_b
    c = coeff.swapped() if swap else coeff
    a0, a1, a2 = c.a
    A0, A1, A2 = c.ap
    b0, b1, b2 = c.b
    B0, B1, B2 = c.bp
    if c.b_tilde_12 <= 0:
        raise ValueError("b_1 b'_2 - b'_1 b_2 must be positive")
    plus = {
        "xx": A1 * B2,
        "oy": a1 * b2 * A0,
        "yo": a1 * b2 * B0,
        "oo": A1 * B2 * a0 * b0 - a1 * b2 * A0 * B0,
    }
    minus = {"yy": a1 * b2, "ox": A1 * B2 * a0, "xo": A1 * B2 * b0}
    if swap:
        plus, minus = _swap_labels(plus), _swap_labels(minus)
    return LinearBound(plus, minus, a1 * A1 * c.b_tilde_12)


def v2_form(coeff: CoefficientSet) -> LinearBound:
    """Linear form of the bound built from every source except yy."""
    denom = coeff.a[1] * coeff.b[1] * coeff.a_tilde_12 * coeff.b_tilde_12
    if coeff.a_tilde_12 * coeff.b_tilde_12 <= 0:
        raise ValueError("a~_12 b~_12 must be positive")
    g = coeff.g
    plus = {lr: g[lr] for lr in ("xx", "oy", "yo", "oo")}
    minus = {lr: g[lr] for lr in ("xy", "yx", "ox", "xo")}
    return LinearBound(plus, minus, denom)


def error_form(coeff: CoefficientSet, s11_lower: float) -> LinearBound:
    """Upper bound on e_11 as ``(T_xx + a0 b0 T_oo - a0 T_ox - b0 T_xo) / (a1 b1 s11)``."""
    if s11_lower <= 0:
        raise ZeroDivisionError("e11 bound needs a positive s11 lower bound")
    a0, a1 = coeff.a[:2]
    b0, b1 = coeff.b[:2]
    return LinearBound({"xx": 1.0, "oo": a0 * b0}, {"ox": a0, "xo": b0}, a1 * b1 * s11_lower)


def s11_lower_v1(S: dict, coeff: CoefficientSet) -> float:
    return max(0.0, v1_form(coeff).evaluate(S))


def s11_lower_v2(S: dict, coeff: CoefficientSet) -> float:
    return max(0.0, v2_form(coeff).evaluate(S))


def e11_upper_asymptotic(T: dict, s11_lower: float, coeff: CoefficientSet) -> float:
    return min(1.0, max(0.0, error_form(coeff, s11_lower).evaluate(T)))
