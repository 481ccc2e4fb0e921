"""Problem containers, solver settings and result types."""
from __future__ import annotations

import enum
from dataclasses import dataclass, field, fields
from typing import Optional, Union

import numpy as np

from .dense import factor_pd
from .errors import NotPositiveDefinite, ValidationFailed

PSD_SHIFT = 1e-10


def _matrix(a, cols: int) -> np.ndarray:
    if a is None:
        return np.zeros((0, cols))
    a = np.array(a, dtype=float)
    if a.ndim == 1 and a.size == 0:
        return a.reshape(0, cols)
    return a


def _vector(a) -> np.ndarray:
    if a is None:
        return np.zeros(0)
    return np.array(a, dtype=float)


@dataclass(frozen=True, eq=False)
class QpProblem:
    """``min ½xᵀQx + qᵀx  s.t.  Ax = b,  Gx ≤ h``.

    Missing ``A``/``b`` or ``G``/``h`` blocks become zero-row arrays.
    """

    Q: np.ndarray
    q: np.ndarray
    A: Optional[np.ndarray] = None
    b: Optional[np.ndarray] = None
    G: Optional[np.ndarray] = None
    h: Optional[np.ndarray] = None

    def __post_init__(self):
        q = _vector(self.q)
        n = q.shape[0]
        set_ = object.__setattr__
        set_(self, "Q", np.array(self.Q, dtype=float))
        set_(self, "q", q)
        set_(self, "A", _matrix(self.A, n))
        set_(self, "b", _vector(self.b))
        set_(self, "G", _matrix(self.G, n))
        set_(self, "h", _vector(self.h))

    @property
    def n(self) -> int:
        return self.q.shape[0]

    @property
    def m(self) -> int:
        return self.b.shape[0]

    @property
    def p(self) -> int:
        return self.h.shape[0]

    def objective(self, x) -> float:
        x = np.asarray(x, dtype=float)
        return float(0.5 * x @ self.Q @ x + self.q @ x)


@dataclass(frozen=True, eq=False)
class ElasticProblem:
    """``min ½xᵀQx + qᵀx + ‖ρ ⊙ max(0, Gx − h)‖₁`` (inequality-only)."""

    Q: np.ndarray
    q: np.ndarray
    G: Optional[np.ndarray] = None
    h: Optional[np.ndarray] = None
    rho: Optional[np.ndarray] = None

    def __post_init__(self):
        q = _vector(self.q)
        set_ = object.__setattr__
        set_(self, "Q", np.array(self.Q, dtype=float))
        set_(self, "q", q)
        set_(self, "G", _matrix(self.G, q.shape[0]))
        set_(self, "h", _vector(self.h))
        set_(self, "rho", _vector(self.rho))

    @property
    def n(self) -> int:
        return self.q.shape[0]

    @property
    def p(self) -> int:
        return self.h.shape[0]

    def violation(self, x) -> np.ndarray:
        return np.maximum(0.0, self.G @ x - self.h)

    def objective(self, x) -> float:
        x = np.asarray(x, dtype=float)
        return float(0.5 * x @ self.Q @ x + self.q @ x + self.rho @ self.violation(x))

    @classmethod
    def from_qp(cls, problem: QpProblem, rho) -> "ElasticProblem":
        """Elastic form of an inequality-only QP with uniform or per-row ``rho``."""
        if problem.m:
            raise ValueError("elastic problems have no equality block")
        rho = np.broadcast_to(np.asarray(rho, dtype=float), (problem.p,)).copy()
        return cls(problem.Q, problem.q, problem.G, problem.h, rho)


Problem = Union[QpProblem, ElasticProblem]


def problem_issues(problem: Problem) -> list[str]:
    """Every dimension, finiteness, symmetry and definiteness violation."""
    issues = []
    n = problem.q.shape[0]
    blocks = [(f.name, getattr(problem, f.name)) for f in fields(problem)]
    for name, arr in blocks:
        if not np.all(np.isfinite(arr)):
            issues.append(f"{name} contains NaN or Inf")
    if problem.q.ndim != 1:
        issues.append(f"q must be a vector, got shape {problem.q.shape}")
    if problem.Q.shape != (n, n):
        issues.append(f"Q has shape {problem.Q.shape}, expected ({n}, {n})")
    pairs = [("G", "h")]
    if isinstance(problem, QpProblem):
        pairs.insert(0, ("A", "b"))
    for mat, vec in pairs:
        M, v = getattr(problem, mat), getattr(problem, vec)
        if M.ndim != 2 or M.shape[1] != n:
            issues.append(f"{mat} has shape {M.shape}, expected (rows, {n})")
        if v.ndim != 1:
            issues.append(f"{vec} must be a vector, got shape {v.shape}")
        elif M.ndim == 2 and M.shape[0] != v.shape[0]:
            issues.append(f"{mat} has {M.shape[0]} rows but {vec} has length {v.shape[0]}")
    if isinstance(problem, ElasticProblem):
        rho = problem.rho
        if rho.ndim != 1 or rho.shape != problem.h.shape:
            issues.append(f"rho has shape {rho.shape}, expected {problem.h.shape}")
        elif np.any(rho <= 0):
            issues.append("rho must be strictly positive")
    Q = problem.Q
    if Q.shape == (n, n) and np.all(np.isfinite(Q)):
        scale = max(1.0, float(np.abs(Q).max())) if n else 1.0
        if n and np.abs(Q - Q.T).max() > 1e-8 * scale:
            issues.append("Q is not symmetric")
        else:
            try:
                factor_pd(0.5 * (Q + Q.T) + PSD_SHIFT * np.eye(n))
            except NotPositiveDefinite:
                issues.append("Q is not positive semidefinite")
    return issues


def validate(problem: Problem) -> None:
    """Raise ValidationFailed listing every problem with ``problem``."""
    issues = problem_issues(problem)
    if issues:
        raise ValidationFailed(issues)


@dataclass(frozen=True, eq=False)
class PrimalDualIterate:
    x: np.ndarray
    s: np.ndarray
    z: np.ndarray
    y: np.ndarray

    @property
    def duality_measure(self) -> float:
        return float(self.s @ self.z / len(self.s)) if len(self.s) else 0.0

    def vector(self) -> np.ndarray:
        return np.concatenate([self.x, self.s, self.z, self.y])


@dataclass(frozen=True, eq=False)
class ElasticIterate:
    x: np.ndarray
    t: np.ndarray
    s1: np.ndarray
    s2: np.ndarray
    z1: np.ndarray
    z2: np.ndarray

    @property
    def s(self) -> np.ndarray:
        return np.concatenate([self.s1, self.s2])

    @property
    def z(self) -> np.ndarray:
        return np.concatenate([self.z1, self.z2])

    @property
    def duality_measure(self) -> float:
        s, z = self.s, self.z
        return float(s @ z / len(s)) if len(s) else 0.0

    def vector(self) -> np.ndarray:
        return np.concatenate([self.x, self.t, self.s1, self.s2, self.z1, self.z2])


Iterate = Union[PrimalDualIterate, ElasticIterate]


@dataclass(frozen=True)
class SolverSettings:
    tol: float = 1e-8
    max_iters: int = 30
    step_scale: float = 0.98
    kappa: float = 1e-2
    relax_max_iters: int = 10
    fd_epsilon: float = 1e-5

    def __post_init__(self):
        if not self.tol > 0:
            raise ValueError("tol must be positive")
        if not 0 < self.step_scale < 1:
            raise ValueError("step_scale must lie in (0, 1)")
        if not self.kappa >= 0:
            raise ValueError("kappa must be nonnegative")
        if self.max_iters < 0 or self.relax_max_iters < 0:
            raise ValueError("iteration caps must be nonnegative")
        if not self.fd_epsilon > 0:
            raise ValueError("fd_epsilon must be positive")


class Status(str, enum.Enum):
    CONVERGED = "converged"
    MAX_ITERS = "max_iters"
    NUMERICAL_FAILURE = "numerical_failure"


@dataclass(frozen=True, eq=False)
class SolveResult:
    """Outcome of a solve or relaxation.

    ``factorizations`` counts SPD factorizations performed, including the
    initialization.
    """

    iterate: Iterate
    status: Status
    iterations: int
    residual_norm: float
    factorizations: int = 0
    message: str = ""

    @property
    def converged(self) -> bool:
        return self.status is Status.CONVERGED

    @property
    def duality_measure(self) -> float:
        return self.iterate.duality_measure


@dataclass(frozen=True, eq=False)
class QpGradients:
    """Gradients of a scalar loss with respect to each problem matrix.

    Elastic problems leave ``A``/``b`` as zero-row arrays and fill ``rho``.
    """

    Q: np.ndarray
    q: np.ndarray
    A: np.ndarray
    b: np.ndarray
    G: np.ndarray
    h: np.ndarray
    rho: Optional[np.ndarray] = field(default=None)

    def blocks(self) -> dict[str, np.ndarray]:
        out = {name: getattr(self, name) for name in ("Q", "q", "A", "b", "G", "h")}
        if self.rho is not None:
            out["rho"] = self.rho
        return out
