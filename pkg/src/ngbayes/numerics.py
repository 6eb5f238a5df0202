"""Special functions and dense SPD linear algebra.

Everything downstream (log-densities, KL divergences, GLM posteriors) is
built on log-gamma, digamma and Cholesky-based SPD routines. Matrices are
small and dense (k, p <= ~21, n <= a few hundred), so no sparse or blocked
code paths exist.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "FactorizationError",
    "SpdMatrix",
    "log_gamma",
    "digamma",
    "cholesky",
    "logdet_spd",
    "spd_solve",
]

_SYMMETRY_RTOL = 1e-12

# Lanczos approximation, g = 7, 9 coefficients (double precision).
_LANCZOS_G = 7.0
_LANCZOS_COEF = (
    0.99999999999980993,
    676.5203681218851,
    -1259.1392167224028,
    771.32342877765313,
    -176.61502916214059,
    12.507343278686905,
    -0.13857109526572012,
    9.9843695780195716e-6,
    1.5056327351493116e-7,
)

_LN_SQRT_2PI = 0.5 * math.log(2.0 * math.pi)

# Asymptotic series coefficients for digamma: -B_{2n} / (2n), n = 1..7.
_DIGAMMA_ASY = (
    -1.0 / 12.0,
    1.0 / 120.0,
    -1.0 / 252.0,
    1.0 / 240.0,
    -1.0 / 132.0,
    691.0 / 32760.0,
    -1.0 / 12.0,
)


class FactorizationError(ValueError):
    """Cholesky factorization hit a non-positive pivot."""

    def __init__(self, pivot_index: int):
        self.pivot_index = pivot_index
        super().__init__(
            f"matrix is not positive definite: pivot {pivot_index} is not positive"
        )


def log_gamma(x: float) -> float:
    """ln Gamma(x) for x > 0 via the Lanczos approximation."""
    x = float(x)
    if not math.isfinite(x) or x <= 0.0:
        raise ValueError(f"log_gamma requires finite x > 0, got {x}")
    if x < 0.5:
        # Reflection: ln Gamma(x) = ln(pi / sin(pi x)) - ln Gamma(1 - x).
        return math.log(math.pi / math.sin(math.pi * x)) - log_gamma(1.0 - x)
    z = x - 1.0
    series = _LANCZOS_COEF[0]
    for i, c in enumerate(_LANCZOS_COEF[1:], start=1):
        series += c / (z + i)
    base = z + _LANCZOS_G + 0.5
    return _LN_SQRT_2PI + (z + 0.5) * math.log(base) - base + math.log(series)


def digamma(x: float) -> float:
    """psi(x) for x > 0: upward recurrence below 6, then asymptotic series."""
    x = float(x)
    if not math.isfinite(x) or x <= 0.0:
        raise ValueError(f"digamma requires finite x > 0, got {x}")
    result = 0.0
    while x < 6.0:
        result -= 1.0 / x
        x += 1.0
    inv2 = 1.0 / (x * x)
    series = 0.0
    power = inv2
    for c in _DIGAMMA_ASY:
        series += c * power
        power *= inv2
    return result + math.log(x) - 0.5 / x + series


def _cholesky_lower(a: np.ndarray) -> np.ndarray:
    """Unblocked Cholesky; raises FactorizationError naming the bad pivot."""
    n = a.shape[0]
    lower = np.zeros_like(a)
    for j in range(n):
        d = a[j, j] - lower[j, :j] @ lower[j, :j]
        if not d > 0.0:
            raise FactorizationError(j)
        lower[j, j] = math.sqrt(d)
        if j + 1 < n:
            lower[j + 1 :, j] = (a[j + 1 :, j] - lower[j + 1 :, :j] @ lower[j, :j]) / lower[j, j]
    return lower


@dataclass(frozen=True)
class SpdMatrix:
    """Symmetric positive-definite matrix with a cached Cholesky factor.

    Validation happens on construction: symmetry to 1e-12 relative
    tolerance and a successful factorization (all pivots > 0).
    """

    entries: np.ndarray
    chol: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        a = np.asarray(self.entries, dtype=float)
        if a.ndim != 2 or a.shape[0] != a.shape[1] or a.shape[0] == 0:
            raise ValueError(f"SpdMatrix requires a square matrix, got shape {a.shape}")
        if not np.all(np.isfinite(a)):
            raise ValueError("SpdMatrix entries must be finite")
        scale = np.max(np.abs(a))
        if np.max(np.abs(a - a.T)) > _SYMMETRY_RTOL * max(scale, 1.0):
            raise ValueError("matrix is not symmetric within tolerance")
        a = 0.5 * (a + a.T)
        a.setflags(write=False)
        object.__setattr__(self, "entries", a)
        object.__setattr__(self, "chol", _cholesky_lower(a))

    @property
    def dim(self) -> int:
        return self.entries.shape[0]

    @staticmethod
    def identity(k: int) -> "SpdMatrix":
        return SpdMatrix(np.eye(k))

    @staticmethod
    def diagonal(diag) -> "SpdMatrix":
        return SpdMatrix(np.diag(np.asarray(diag, dtype=float)))


def cholesky(a: SpdMatrix) -> np.ndarray:
    """Lower-triangular L with L @ L.T == a.entries."""
    return a.chol


def logdet_spd(a: SpdMatrix) -> float:
    """ln |A| = 2 * sum(log(diag(L)))."""
    return 2.0 * float(np.sum(np.log(np.diag(a.chol))))


def spd_solve(a: SpdMatrix, b: np.ndarray) -> np.ndarray:
    """Solve A @ X = B via the cached Cholesky factor."""
    b = np.asarray(b, dtype=float)
    rows = b.shape[0]
    if rows != a.dim:
        raise ValueError(f"shape mismatch: A is {a.dim}x{a.dim}, B has {rows} rows")
    lower = a.chol
    y = np.linalg.solve(lower, b)
    return np.linalg.solve(lower.T, y)


def spd_inverse(a: SpdMatrix) -> np.ndarray:
    """Dense inverse of an SPD matrix."""
    return spd_solve(a, np.eye(a.dim))
