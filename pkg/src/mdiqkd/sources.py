"""Photon-number models of the vacuum/decoy/signal sources and their two-pulse mixtures."""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

K_MAX = 15
TRUNCATION_TOL = 1e-10

SOURCES = ("o", "x", "y")
# Nine two-pulse sources, Alice's label first.
PAIRS = ("oo", "ox", "xo", "oy", "yo", "xx", "xy", "yx", "yy")

_RATIO_RTOL = 1e-12


def pair_index(lr: str) -> tuple[int, int]:
    return SOURCES.index(lr[0]), SOURCES.index(lr[1])


def _frozen(a) -> np.ndarray:
    arr = np.array(a, dtype=float)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class PhotonDistribution:
    """Photon-number coefficients ``coeffs[k]`` of a phase-randomized source."""

    intensity: float
    coeffs: np.ndarray
    truncation_tol: float = TRUNCATION_TOL

    def __post_init__(self):
        c = _frozen(self.coeffs)
        if c.ndim != 1 or c.size < 3:
            raise ValueError("need at least coefficients for k = 0, 1, 2")
        if np.any(c < 0):
            raise ValueError("photon-number coefficients must be nonnegative")
        total = math.fsum(c)
        if total > 1 + 1e-12:
            raise ValueError(f"coefficients sum to {total} > 1")
        if 1 - total > self.truncation_tol:
            raise ValueError(
                f"truncated tail {1 - total:.3g} exceeds tolerance {self.truncation_tol:g}"
            )
        object.__setattr__(self, "coeffs", c)

    @property
    def k_max(self) -> int:
        return self.coeffs.size - 1

    def truncated(self, k_max: int) -> "PhotonDistribution":
        return PhotonDistribution(self.intensity, self.coeffs[: k_max + 1], truncation_tol=1.0)


def poisson_distribution(mu: float, k_max: int = K_MAX, truncation_tol: float = TRUNCATION_TOL) -> PhotonDistribution:
    """Coherent-state distribution ``e^-mu mu^k / k!`` truncated at ``k_max``."""
    if not mu >= 0:
        raise ValueError(f"intensity must be nonnegative, got {mu}")
    if k_max < 2:
        raise ValueError("k_max must be at least 2")
    k = np.arange(k_max + 1)
    if mu == 0:
        coeffs = (k == 0).astype(float)
    else:
        # log-space avoids overflow in mu**k / k! for large k
        log_c = -mu + k * math.log(mu) - np.array([math.lgamma(i + 1) for i in k])
        coeffs = np.exp(log_c)
    return PhotonDistribution(float(mu), coeffs, truncation_tol=truncation_tol)


@dataclass(frozen=True)
class SourceTriple:
    vacuum: PhotonDistribution
    decoy: PhotonDistribution
    signal: PhotonDistribution

    def __post_init__(self):
        if self.vacuum.coeffs[0] != 1.0:
            raise ValueError("vacuum source must emit |0> exactly")
        if not check_decoy_condition(self.decoy, self.signal):
            raise ValueError("decoy/signal pair violates the decoy-state condition")

    def __getitem__(self, label: str) -> PhotonDistribution:
        return {"o": self.vacuum, "x": self.decoy, "y": self.signal}[label]

    @property
    def k_max(self) -> int:
        return min(self.vacuum.k_max, self.decoy.k_max, self.signal.k_max)

    def matrix(self, k_max: int | None = None) -> np.ndarray:
        """Rows o, x, y of photon-number coefficients, shape (3, k_max + 1)."""
        k = self.k_max if k_max is None else k_max
        return np.vstack([self[s].coeffs[: k + 1] for s in SOURCES])


def coherent_triple(mu_x: float, mu_y: float, k_max: int = K_MAX) -> SourceTriple:
    return SourceTriple(
        poisson_distribution(0.0, k_max),
        poisson_distribution(mu_x, k_max),
        poisson_distribution(mu_y, k_max),
    )


def _ratio(num: float, den: float) -> float:
    return math.inf if den == 0 else num / den


def check_decoy_condition(decoy: PhotonDistribution, signal: PhotonDistribution) -> bool:
    """True iff ``a'_k/a_k >= a'_2/a_2 >= a'_1/a_1`` for every ``k >= 2``.

    Ratios with a zero denominator count as +inf (satisfied).
    """
    a, ap = decoy.coeffs, signal.coeffs
    if a[1] <= 0 or a[2] <= 0:
        raise ValueError("degenerate decoy: single- and two-photon coefficients must be positive")
    r1 = ap[1] / a[1]
    r2 = ap[2] / a[2]
    if r2 < r1 * (1 - _RATIO_RTOL):
        return False
    k_max = min(decoy.k_max, signal.k_max)
    for k in range(3, k_max + 1):
        if _ratio(ap[k], a[k]) < r2 * (1 - _RATIO_RTOL):
            return False
    return True


@dataclass(frozen=True)
class CoefficientTensor:
    """``c[l, r, m, n] = alice_l[m] * bob_r[n]`` for the nine two-pulse sources."""

    c: np.ndarray = field(repr=False)

    def __post_init__(self):
        object.__setattr__(self, "c", _frozen(self.c))

    @property
    def k_max(self) -> int:
        return self.c.shape[-1] - 1

    def __getitem__(self, lr: str) -> np.ndarray:
        i, j = pair_index(lr)
        return self.c[i, j]


def two_pulse_coefficients(alice: SourceTriple, bob: SourceTriple, k_max: int | None = None) -> CoefficientTensor:
    k = min(alice.k_max, bob.k_max) if k_max is None else k_max
    if k > min(alice.k_max, bob.k_max):
        raise ValueError("k_max exceeds the truncation of the supplied distributions")
    A = alice.matrix(k)
    B = bob.matrix(k)
    return CoefficientTensor(np.einsum("lm,rn->lrmn", A, B))
