"""Gradients of a loss through the (relaxed) QP solution.

The KKT residual ``r(w, θ)`` vanishes at the solution, so for a loss
``ℓ(x)`` the vector-Jacobian product is ``∇_θ ℓ = −λᵀ ∂r/∂θ`` with
``Kᵀλ = (∇ₓℓ, 0, …)``. The KKT Jacobian ``K`` is not symmetric, but solving
``K·d = (−∇ₓℓ, 0, …)`` with the same block solver gives ``λ`` up to a
diagonal rescaling of the dual block, which is where ``dz = dz̃ ⊘ z`` comes
from.

For the inequality rows this gives ``∇_G ℓ = dz̃·xᵀ + z·dxᵀ`` (equivalently
``D(z)·dz·xᵀ + z·dxᵀ``): only the first outer product carries the ``z``
scaling. ``tests/test_diff.py`` pins this against central differences.
"""
from __future__ import annotations

import dataclasses
from typing import Callable, Optional

import numpy as np

from .errors import QpError
from .kkt import ElasticKkt, StandardKkt
from .pdip import solve
from .problem import (
    ElasticIterate,
    ElasticProblem,
    PrimalDualIterate,
    QpGradients,
    QpProblem,
    SolverSettings,
)
from .relax import relax


def _sym_outer(u, v):
    return 0.5 * (np.outer(u, v) + np.outer(v, u))


def compute_qp_grads(problem: QpProblem, iterate: PrimalDualIterate, grad_x) -> QpGradients:
    """Reverse-mode gradients of ``ℓ(x*)`` given ``∇ₓℓ``."""
    grad_x = np.asarray(grad_x, dtype=float)
    p, m = problem.p, problem.m
    x, z, y = iterate.x, iterate.z, iterate.y
    ws = StandardKkt(problem, iterate.s, z)
    dx, _, dz_tilde, dy = ws.solve(-grad_x, np.zeros(p), np.zeros(p), np.zeros(m))
    return QpGradients(
        Q=_sym_outer(dx, x),
        q=dx,
        A=np.outer(dy, x) + np.outer(y, dx),
        b=-dy,
        G=np.outer(dz_tilde, x) + np.outer(z, dx),
        h=-dz_tilde,
    )


def compute_elastic_qp_grads(problem: ElasticProblem, iterate: ElasticIterate, grad_x) -> QpGradients:
    """Gradients for the elastic problem; ``A``/``b`` are empty, ``rho`` is filled.

    Treating ``(x, t)`` as one primal vector and stacking ``(z1, z2)``, the
    ``G`` block lives in the ``z2`` rows and the ``x`` columns, which is all
    that is extracted here.
    """
    grad_x = np.asarray(grad_x, dtype=float)
    n, p = problem.n, problem.p
    x, z2 = iterate.x, iterate.z2
    ws = ElasticKkt(problem, iterate.s1, iterate.s2, iterate.z1, z2)
    zeros = np.zeros(p)
    dx, dt, _, _, _, dz2_tilde = ws.solve(-grad_x, zeros, zeros, zeros, zeros, zeros)
    return QpGradients(
        Q=_sym_outer(dx, x),
        q=dx,
        A=np.zeros((0, n)),
        b=np.zeros(0),
        G=np.outer(dz2_tilde, x) + np.outer(z2, dx),
        h=-dz2_tilde,
        rho=dt,
    )


def compute_grads(problem, iterate, grad_x) -> QpGradients:
    if isinstance(problem, ElasticProblem):
        return compute_elastic_qp_grads(problem, iterate, grad_x)
    return compute_qp_grads(problem, iterate, grad_x)


def solve_and_relax(problem, kappa: float, settings: Optional[SolverSettings] = None):
    """Solve to ``settings.tol``, then relax to ``kappa``.

    Returns ``(solved, relaxed)``. The solved result is the one to report;
    the relaxed iterate is the one to differentiate at.
    """
    settings = settings or SolverSettings()
    solved = solve(problem, settings)
    if not solved.converged:
        raise QpError(f"solve did not converge: {solved.status.value} {solved.message}".strip())
    relaxed = relax(problem, solved.iterate, kappa, settings)
    return solved, relaxed


def differentiate(problem, grad_x, kappa: float, settings: Optional[SolverSettings] = None):
    """Solve, relax to ``kappa`` and differentiate.

    Returns ``(solved, relaxed, gradients)``.
    """
    solved, relaxed = solve_and_relax(problem, kappa, settings)
    return solved, relaxed, compute_grads(problem, relaxed.iterate, grad_x)


def _oracle_settings(settings: SolverSettings) -> SolverSettings:
    # Central differences divide solution error by 2ε, so relax far past the
    # solver tolerance.
    return dataclasses.replace(
        settings, tol=min(settings.tol, 1e-12), relax_max_iters=max(settings.relax_max_iters, 40)
    )


def fd_gradients(
    problem,
    grad_x=None,
    kappa: float = 1e-2,
    settings: Optional[SolverSettings] = None,
    eps: Optional[float] = None,
    loss: Optional[Callable[[np.ndarray], float]] = None,
) -> QpGradients:
    """Central-difference gradients of ``ℓ(x*(θ; κ))`` over every problem entry.

    ``ℓ`` is ``loss`` if given, else the linear loss ``grad_xᵀx``. Each
    perturbed problem is solved from scratch and relaxed to ``kappa``.
    Symmetric ``Q`` entries are perturbed in pairs so the result matches a
    symmetric gradient.
    """
    settings = settings or SolverSettings()
    eps = settings.fd_epsilon if eps is None else eps
    if loss is None:
        seed = np.asarray(grad_x, dtype=float)
        loss = lambda x: float(seed @ x)  # noqa: E731
    solve_settings = settings
    relax_settings = _oracle_settings(settings)

    def value(prob) -> float:
        solved = solve(prob, solve_settings)
        if not solved.converged:
            raise QpError(f"perturbed solve failed: {solved.status.value}")
        return loss(relax(prob, solved.iterate, kappa, relax_settings).iterate.x)

    def perturbed(name, index, delta, mirror=None):
        arr = getattr(problem, name).copy()
        arr[index] += delta
        if mirror is not None:
            arr[mirror] += delta
        return dataclasses.replace(problem, **{name: arr})

    names = ["Q", "q", "G", "h"]
    if isinstance(problem, QpProblem):
        names[2:2] = ["A", "b"]
    else:
        names.append("rho")
    out = {}
    for name in names:
        base = getattr(problem, name)
        grad = np.zeros_like(base)
        for index in np.ndindex(base.shape):
            mirror = None
            if name == "Q":
                i, j = index
                if j < i:
                    continue
                if i != j:
                    mirror = (j, i)
            diff = value(perturbed(name, index, eps, mirror)) - value(perturbed(name, index, -eps, mirror))
            g = diff / (2 * eps)
            if mirror is not None:
                g /= 2
                grad[mirror] = g
            grad[index] = g
        out[name] = grad
    if isinstance(problem, ElasticProblem):
        out["A"], out["b"] = np.zeros((0, problem.n)), np.zeros(0)
    return QpGradients(**out)


def relative_error(actual, expected, rtol: float = 1e-4, atol: float = 1e-6) -> float:
    """Max of ``|a − e| / max(|e|, atol/rtol)``; passing means ``≤ rtol``.

    Equivalent to requiring ``|a − e| ≤ max(rtol·|e|, atol)`` entrywise.
    """
    actual, expected = np.asarray(actual, dtype=float), np.asarray(expected, dtype=float)
    if not expected.size:
        return 0.0
    return float(np.max(np.abs(actual - expected) / np.maximum(np.abs(expected), atol / rtol)))


def gradient_deviation(a: QpGradients, b: QpGradients, rtol: float = 1e-4, atol: float = 1e-6) -> dict:
    """Per-block :func:`relative_error` of ``a`` against reference ``b``."""
    ref = b.blocks()
    return {name: relative_error(val, ref[name], rtol, atol) for name, val in a.blocks().items() if name in ref}

