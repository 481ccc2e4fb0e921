"""Dense linear algebra used by the KKT solvers.

Cholesky factorization goes straight to LAPACK (``potrf``/``potrs``) because
the matrices here are tiny and the scipy/numpy wrappers cost more than the
arithmetic.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.linalg import lapack

from .errors import DimensionMismatch, DivisionNearZero, NotPositiveDefinite

PIVOT_FLOOR = 1e-13
DIV_FLOOR = 1e-14
SYMMETRY_RTOL = 1e-8


@dataclass(frozen=True)
class PdFactorization:
    """Lower Cholesky factor of a symmetric positive-definite matrix."""

    lower: np.ndarray

    @property
    def dim(self) -> int:
        return self.lower.shape[0]


def factor_pd(M, pivot_floor: float = PIVOT_FLOOR) -> PdFactorization:
    """Cholesky-factor ``M``.

    Raises NotPositiveDefinite if LAPACK fails or any pivot (squared diagonal
    entry of the factor) is ``<= pivot_floor``.
    """
    M = np.asarray(M, dtype=float)
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise DimensionMismatch(f"expected a square matrix, got shape {M.shape}")
    n = M.shape[0]
    if n == 0:
        return PdFactorization(np.zeros((0, 0)))
    scale = max(1.0, float(np.abs(M).max()))
    if np.abs(M - M.T).max() > SYMMETRY_RTOL * scale:
        raise ValueError("matrix is not symmetric")
    c, info = lapack.dpotrf(M, lower=1, clean=1)
    if info != 0:
        raise NotPositiveDefinite(f"Cholesky failed at leading minor {info}")
    pivots = np.diag(c) ** 2
    if pivots.min() <= pivot_floor:
        k = int(pivots.argmin())
        raise NotPositiveDefinite(f"pivot {k} = {pivots[k]:.3e} below floor {pivot_floor:.1e}")
    return PdFactorization(c)


def solve_pd(f: PdFactorization, r) -> np.ndarray:
    """Solve ``M x = r`` given the factorization of ``M``. ``r`` may be a matrix."""
    r = np.asarray(r, dtype=float)
    if r.shape[0] != f.dim:
        raise DimensionMismatch(f"rhs has {r.shape[0]} rows, factorization has dimension {f.dim}")
    if f.dim == 0 or r.size == 0:
        return np.zeros_like(r)
    x, info = lapack.dpotrs(f.lower, r, lower=1)
    if info != 0:
        raise ValueError(f"potrs returned info={info}")
    return x


def _check_lengths(v, w):
    if v.shape != w.shape:
        raise DimensionMismatch(f"length mismatch: {v.shape} vs {w.shape}")


def mul(v, w) -> np.ndarray:
    v, w = np.asarray(v, dtype=float), np.asarray(w, dtype=float)
    _check_lengths(v, w)
    return v * w


def div(v, w, floor: float = DIV_FLOOR) -> np.ndarray:
    """Elementwise ``v / w``; raises DivisionNearZero if any ``|w_i| < floor``."""
    v, w = np.asarray(v, dtype=float), np.asarray(w, dtype=float)
    _check_lengths(v, w)
    if w.size and np.abs(w).min() < floor:
        raise DivisionNearZero(f"denominator entry {np.abs(w).min():.3e} below {floor:.1e}")
    return v / w


def axpy(a: float, x, y) -> np.ndarray:
    """Return ``a * x + y``."""
    x, y = np.asarray(x, dtype=float), np.asarray(y, dtype=float)
    _check_lengths(x, y)
    return a * x + y
