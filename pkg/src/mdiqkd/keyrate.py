"""Secure key rate per pulse pair from the bounded single-photon quantities."""
from __future__ import annotations

import math
from dataclasses import dataclass

from .asymptotic import g_coefficients
from .channel import ChannelParams, ObservedStatistics, ProtocolParams, simulate
from .fluctuation import BoundResult, FluctuationConfig, estimate_bounds
from .sources import K_MAX, coherent_triple

F_E = 1.16


def binary_entropy(e: float) -> float:
    """Shannon entropy in bits; ``H(0) = H(1) = 0``."""
    if not 0.0 <= e <= 1.0:
        raise ValueError(f"binary entropy needs e in [0, 1], got {e}")
    if e == 0.0 or e == 1.0:
        return 0.0
    return -e * math.log2(e) - (1 - e) * math.log2(1 - e)


@dataclass(frozen=True)
class KeyRateInputs:
    p_y: float
    pZ_given_y: float
    a1_prime: float
    b1_prime: float
    s11_Z: float
    e11_X: float
    S_yy_Z: float
    E_yy_Z: float
    f_e: float = F_E

    def __post_init__(self):
        for name in ("p_y", "pZ_given_y", "a1_prime", "b1_prime", "e11_X", "E_yy_Z"):
            v = getattr(self, name)
            if not 0 <= v <= 1:
                raise ValueError(f"{name} must lie in [0, 1], got {v}")
        if self.s11_Z < 0 or self.S_yy_Z < 0:
            raise ValueError("yields must be nonnegative")
        if self.f_e < 1:
            raise ValueError("error-correction inefficiency f_e must be >= 1")


@dataclass(frozen=True)
class KeyRate:
    R: float
    raw: float
    clamped: bool


def key_rate(inp: KeyRateInputs) -> KeyRate:
    """``1/2 p_y^2 p_{Z|y}^2 [a'_1 b'_1 s11 (1 - H(e11)) - f_e S_yy H(E_yy)]``, floored at zero.

    The prefactor multiplies both terms: key bits and the error-correction
    leakage come from the same signal-signal Z-basis pairs. ``e11`` is capped
    at 1/2, beyond which a single-photon pair carries no secrecy.
    """
    sift = 0.5 * inp.p_y**2 * inp.pZ_given_y**2
    privacy = inp.a1_prime * inp.b1_prime * inp.s11_Z * (1 - binary_entropy(min(inp.e11_X, 0.5)))
    leak = inp.f_e * inp.S_yy_Z * binary_entropy(inp.E_yy_Z)
    raw = sift * (privacy - leak)
    return KeyRate(max(raw, 0.0), raw, raw <= 0)


@dataclass(frozen=True)
class Evaluation:
    """Everything computed for one parameter point."""

    proto: ProtocolParams
    stats: ObservedStatistics
    bounds_Z: BoundResult
    bounds_X: BoundResult
    rate: KeyRate

    @property
    def flags(self) -> tuple:
        return tuple(dict.fromkeys(
            [f"Z:{f}" for f in self.bounds_Z.flags]
            + [f"X:{f}" for f in self.bounds_X.flags]
            + [f"low_count:{lc}" for lc in self.stats.low_count]
            + (["rate_clamped"] if self.rate.clamped else [])
        ))


def evaluate(ch: ChannelParams, proto: ProtocolParams, method: str = "improved",
             cfg: FluctuationConfig | None = None, f_e: float = F_E, k_max: int = K_MAX) -> Evaluation:
    """Simulate the observed statistics at ``proto`` and turn them into a key rate."""
    cfg = FluctuationConfig() if cfg is None else cfg
    src = coherent_triple(proto.mu_x, proto.mu_y, k_max)
    stats = simulate(ch, proto, k_max)
    coeff = g_coefficients(src, src)
    bz = estimate_bounds(stats.Z, coeff, cfg, method)
    bx = estimate_bounds(stats.X, coeff, cfg, method)
    a1p = src.signal.coeffs[1]
    rate = key_rate(KeyRateInputs(
        p_y=proto.p_y,
        pZ_given_y=1 - proto.pX_given_y,
        a1_prime=a1p,
        b1_prime=a1p,
        s11_Z=bz.s11_lower,
        e11_X=bx.e11_upper,
        S_yy_Z=stats.S_yy_Z,
        E_yy_Z=stats.E_yy_Z,
        f_e=f_e,
    ))
    return Evaluation(proto, stats, bz, bx, rate)
