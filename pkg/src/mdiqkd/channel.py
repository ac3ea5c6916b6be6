"""Linear-loss channel with a four-detector Bell-state measurement at the midpoint.

The relay model is the usual polarization-encoding one: a 50:50 beam splitter
followed by a polarizing beam splitter and a threshold detector in each of the
four outputs (c_H, c_V, d_H, d_V). A pair counts as a success when exactly one
H detector and exactly one V detector click (either Bell state psi+ or psi-).
Each arm has transmittance ``eta = eta_d * 10**(-alpha * (L/2) / 10)``.

For phase-randomized coherent inputs with per-arm mean photon numbers
``u = eta*mu_a`` and ``v = eta*mu_b`` the gains are (P = 1 - pd)::

    Z basis, orthogonal inputs   Q_C = 2 P^2 e^{-(u+v)/2} [1 - P e^{-u/2}] [1 - P e^{-v/2}]
    Z basis, identical inputs    Q_E = 2 pd P^2 e^{-(u+v)/2} [I0(sqrt(uv)) - P e^{-(u+v)/2}]
    Z basis                      S = Q_C + Q_E,   T = e_d Q_C + (1 - e_d) Q_E
    X basis, y = P e^{-(u+v)/4}  S = 2 y^2 [1 + 2 y^2 - 4 y I0(sqrt(uv)/2) + I0(sqrt(uv))]
                                 T = e0 S - 2 (e0 - e_d) y^2 [I0(sqrt(uv)) - 1]

Every term has the form ``A e^{-p mu_a - q mu_b} I0(sqrt(k mu_a mu_b))``, so the
Fock-pair yields, defined by ``S(mu_a, mu_b) = sum_mn Pois(m; mu_a) Pois(n; mu_b) s_mn``,
are the Taylor coefficients of ``e^{mu_a + mu_b} S``::

    s_mn  <-  A * sum_j C(m,j) C(n,j) (k/4)^j (1-p)^(m-j) (1-q)^(n-j)

These alternate in sign and cancel down to ~pd^2 for the vacuum pair, so they
are accumulated in 50-digit arithmetic before rounding to float.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache

import mpmath
import numpy as np

from .sources import K_MAX, PAIRS, SOURCES, CoefficientTensor, pair_index

BASES = ("X", "Z")


@dataclass(frozen=True)
class ChannelParams:
    e0: float = 0.5
    ed: float = 0.015
    pd: float = 6.02e-6
    eta_d: float = 0.145
    alpha_db_per_km: float = 0.2
    distance_km: float = 0.0

    def __post_init__(self):
        for name in ("e0", "ed", "pd", "eta_d"):
            v = getattr(self, name)
            if not 0 <= v <= 1:
                raise ValueError(f"{name} must lie in [0, 1], got {v}")
        if self.alpha_db_per_km < 0 or self.distance_km < 0:
            raise ValueError("fiber loss and distance must be nonnegative")

    @property
    def arm_transmittance(self) -> float:
        return self.eta_d * 10 ** (-self.alpha_db_per_km * (self.distance_km / 2) / 10)


@dataclass(frozen=True)
class ProtocolParams:
    """Symmetric protocol settings (Alice and Bob use identical values).

    With ``shared_vacuum`` the strict-vacuum source carries no basis label: a
    pair involving ``o`` is counted in the basis chosen by the other party, and
    ``oo`` pairs serve both bases. ``pX_given_o`` is then immaterial.
    """

    mu_x: float
    mu_y: float
    p_x: float
    p_y: float
    pX_given_o: float = 1.0
    pX_given_x: float = 0.5
    pX_given_y: float = 0.5
    N_t: float = 1e12
    shared_vacuum: bool = True

    def __post_init__(self):
        for name in ("p_x", "p_y", "pX_given_o", "pX_given_x", "pX_given_y"):
            v = getattr(self, name)
            if not 0 <= v <= 1:
                raise ValueError(f"{name} must lie in [0, 1], got {v}")
        if self.p_x + self.p_y > 1 + 1e-15:
            raise ValueError("p_x + p_y must not exceed 1")
        if not 0 <= self.mu_x < self.mu_y:
            raise ValueError("need 0 <= mu_x < mu_y")
        if self.N_t <= 0:
            raise ValueError("N_t must be positive")

    @property
    def p_o(self) -> float:
        return max(0.0, 1.0 - self.p_x - self.p_y)

    def source_prob(self, s: str) -> float:
        return {"o": self.p_o, "x": self.p_x, "y": self.p_y}[s]

    def basis_prob(self, s: str, basis: str) -> float:
        if s == "o" and self.shared_vacuum:
            return 1.0
        pX = {"o": self.pX_given_o, "x": self.pX_given_x, "y": self.pX_given_y}[s]
        return pX if basis == "X" else 1.0 - pX

    def pair_counts(self, basis: str) -> np.ndarray:
        """``N_lr = N_t p_l p_r p_{w|l} p_{w|r}`` as a 3x3 array."""
        w = np.array([self.source_prob(s) * self.basis_prob(s, basis) for s in SOURCES])
        return self.N_t * np.outer(w, w)


@dataclass(frozen=True)
class FockYieldTable:
    basis: str
    s: np.ndarray = field(repr=False)
    e: np.ndarray = field(repr=False)

    @property
    def k_max(self) -> int:
        return self.s.shape[0] - 1

    @property
    def t(self) -> np.ndarray:
        return self.s * self.e


# (amplitude, p, q, k): amplitude * exp(-p mu_a - q mu_b) * I0(sqrt(k mu_a mu_b))
def _z_terms(eta, pd, ed):
    P = 1 - pd
    h = eta / 2
    qc = [
        (2 * P**2, h, h, 0),
        (-2 * P**3, eta, h, 0),
        (-2 * P**3, h, eta, 0),
        (2 * P**4, eta, eta, 0),
    ]
    qe = [
        (2 * pd * P**2, h, h, eta**2),
        (-2 * pd * P**3, eta, eta, 0),
    ]
    return qc, qe


def _x_terms(eta, pd, e0, ed):
    P = 1 - pd
    h, q = eta / 2, eta / 4
    gain = [
        (2 * P**2, h, h, 0),
        (4 * P**4, eta, eta, 0),
        (-8 * P**3, 3 * q, 3 * q, eta**2 / 4),
        (2 * P**2, h, h, eta**2),
    ]
    interference = [
        (2 * P**2, h, h, eta**2),
        (-2 * P**2, h, h, 0),
    ]
    return gain, interference


def _fock_matrix(terms, k_max):
    out = [[mpmath.mpf(0)] * (k_max + 1) for _ in range(k_max + 1)]
    for amp, p, q, k in terms:
        amp, p, q, k = (mpmath.mpf(amp), mpmath.mpf(p), mpmath.mpf(q), mpmath.mpf(k))
        ra, rb, kq = 1 - p, 1 - q, k / 4
        for m in range(k_max + 1):
            for n in range(k_max + 1):
                jmax = min(m, n) if k != 0 else 0
                acc = mpmath.mpf(0)
                for j in range(jmax + 1):
                    acc += (
                        mpmath.binomial(m, j) * mpmath.binomial(n, j)
                        * kq**j * ra ** (m - j) * rb ** (n - j)
                    )
                out[m][n] += amp * acc
    return out


def _combine(mats_and_weights, k_max):
    res = np.zeros((k_max + 1, k_max + 1))
    for m in range(k_max + 1):
        for n in range(k_max + 1):
            res[m, n] = float(sum(w * mat[m][n] for mat, w in mats_and_weights))
    return res


@lru_cache(maxsize=256)
def _fock_yields_cached(eta, pd, e0, ed, basis, k_max):
    with mpmath.workdps(50):
        if basis == "Z":
            qc, qe = _z_terms(eta, pd, ed)
            C = _fock_matrix(qc, k_max)
            E = _fock_matrix(qe, k_max)
            ed_m = mpmath.mpf(ed)
            s = _combine([(C, 1), (E, 1)], k_max)
            t = _combine([(C, ed_m), (E, 1 - ed_m)], k_max)
        else:
            gain, interf = _x_terms(eta, pd, e0, ed)
            G = _fock_matrix(gain, k_max)
            D = _fock_matrix(interf, k_max)
            e0_m, ed_m = mpmath.mpf(e0), mpmath.mpf(ed)
            s = _combine([(G, 1)], k_max)
            t = _combine([(G, e0_m), (D, -(e0_m - ed_m))], k_max)
    s = np.clip(s, 0.0, 1.0)
    t = np.clip(t, 0.0, s)
    with np.errstate(invalid="ignore", divide="ignore"):
        e = np.where(s > 0, t / np.where(s > 0, s, 1.0), e0)
    e[0, 0] = e0
    s.setflags(write=False)
    e.setflags(write=False)
    return s, e


def fock_yields(ch: ChannelParams, basis: str, k_max: int = K_MAX) -> FockYieldTable:
    """Yields ``s_mn`` and error rates ``e_mn`` of the Fock pair |m, n> in one basis."""
    if basis not in BASES:
        raise ValueError(f"basis must be 'X' or 'Z', got {basis!r}")
    s, e = _fock_yields_cached(ch.arm_transmittance, ch.pd, ch.e0, ch.ed, basis, k_max)
    return FockYieldTable(basis, s, e)


def z_orthogonal_yields(ch: ChannelParams, k_max: int = K_MAX) -> np.ndarray:
    """Fock yields of psi- successes given orthogonal Z inputs (the Q_C part)."""
    qc, _ = _z_terms(ch.arm_transmittance, ch.pd, ch.ed)
    with mpmath.workdps(50):
        C = _fock_matrix(qc, k_max)
        return _combine([(C, 1)], k_max)


@dataclass(frozen=True)
class BasisStatistics:
    """Per-pair gains ``S``, error gains ``T`` and pulse-pair counts ``N`` of one basis."""

    basis: str
    S: dict
    T: dict
    N: dict

    @property
    def E(self) -> dict:
        return {lr: (self.T[lr] / self.S[lr] if self.S[lr] > 0 else 0.0) for lr in PAIRS}

    def transposed(self) -> "BasisStatistics":
        """Statistics seen with Alice and Bob relabelled."""
        sw = lambda d: {lr: d[lr[::-1]] for lr in PAIRS}
        return BasisStatistics(self.basis, sw(self.S), sw(self.T), sw(self.N))

    def scaled(self, n_factor: float) -> "BasisStatistics":
        return BasisStatistics(self.basis, dict(self.S), dict(self.T), {k: v * n_factor for k, v in self.N.items()})

    def low_count_pairs(self, threshold: float = 1.0) -> tuple[str, ...]:
        return tuple(lr for lr in PAIRS if self.N[lr] * self.S[lr] < threshold)


@dataclass(frozen=True)
class ObservedStatistics:
    X: BasisStatistics
    Z: BasisStatistics

    def __getitem__(self, basis: str) -> BasisStatistics:
        return {"X": self.X, "Z": self.Z}[basis]

    @property
    def S_yy_Z(self) -> float:
        return self.Z.S["yy"]

    @property
    def E_yy_Z(self) -> float:
        return self.Z.E["yy"]

    @property
    def low_count(self) -> tuple[str, ...]:
        """``basis:lr`` labels with fewer than one expected success."""
        return tuple(f"{b}:{lr}" for b in BASES for lr in self[b].low_count_pairs())


def _basis_statistics(tensor: CoefficientTensor, table: FockYieldTable, N: np.ndarray) -> BasisStatistics:
    if tensor.k_max != table.k_max:
        raise ValueError("coefficient tensor and yield table use different truncation orders")
    S = np.einsum("lrmn,mn->lr", tensor.c, table.s)
    T = np.einsum("lrmn,mn->lr", tensor.c, table.t)
    T = np.minimum(T, S)
    mk = lambda arr: {lr: float(arr[pair_index(lr)]) for lr in PAIRS}
    return BasisStatistics(table.basis, mk(S), mk(T), mk(N))


def observe_statistics(tensor: CoefficientTensor, yields: dict, proto: ProtocolParams) -> ObservedStatistics:
    """Expected gains, error gains and counts, ``S_lr = sum_mn c^lr_mn s_mn``."""
    return ObservedStatistics(
        X=_basis_statistics(tensor, yields["X"], proto.pair_counts("X")),
        Z=_basis_statistics(tensor, yields["Z"], proto.pair_counts("Z")),
    )


def simulate(ch: ChannelParams, proto: ProtocolParams, k_max: int = K_MAX) -> ObservedStatistics:
    """Convenience wrapper: coherent sources -> yields -> observed statistics."""
    from .sources import coherent_triple, two_pulse_coefficients

    src = coherent_triple(proto.mu_x, proto.mu_y, k_max)
    tensor = two_pulse_coefficients(src, src, k_max)
    yields = {b: fock_yields(ch, b, k_max) for b in BASES}
    return observe_statistics(tensor, yields, proto)
