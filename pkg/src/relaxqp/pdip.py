"""Primal-dual interior-point solvers (Mehrotra predictor-corrector).

Both solvers share one iteration shape: evaluate the KKT residuals, take an
affine-scaling step, pick the centering weight ``σ = (μ_aff / μ)³``, solve
again with the corrected complementarity row, and move by a 0.98
fraction-to-boundary step. The standard solver factors ``H`` and ``F`` once
per iteration; the elastic one factors a single ``n×n`` matrix.
"""
from __future__ import annotations

import logging
from typing import Callable, Optional

import numpy as np

from .dense import factor_pd, solve_pd
from .errors import DivisionNearZero, NotPositiveDefinite
from .kkt import ElasticKkt, StandardKkt, elastic_residuals, inf_norm, standard_residuals
from .problem import (
    ElasticIterate,
    ElasticProblem,
    PrimalDualIterate,
    QpProblem,
    SolveResult,
    SolverSettings,
    Status,
)

log = logging.getLogger(__name__)

DIVERGENCE_LIMIT = 1e12
SHIFT_MARGIN = 1e-8


def linesearch(v, dv) -> float:
    """Largest ``α ≤ 1`` keeping ``v + α·dv ≥ 0`` (``v`` strictly positive)."""
    v, dv = np.asarray(v, dtype=float), np.asarray(dv, dtype=float)
    neg = dv < 0
    if not neg.any():
        return 1.0
    return float(min(1.0, np.min(-v[neg] / dv[neg])))


def shift_to_interior(s, z, margin: float = SHIFT_MARGIN):
    """Make ``s`` and ``z`` strictly positive by uniform shifts.

    ``s`` is shifted by ``1 − min(s)`` when its smallest entry is below
    ``margin``, likewise ``z``, so every shifted entry is at least one. The
    margin (rather than zero) catches entries that are positive only by
    roundoff, e.g. constraints tight at the initial point.
    """
    s, z = np.array(s, dtype=float), np.array(z, dtype=float)
    if s.size:
        if s.min() < margin:
            s = s + 1.0 - s.min()
        if z.min() < margin:
            z = z + 1.0 - z.min()
    return s, z


def initialize_qp(problem: QpProblem) -> PrimalDualIterate:
    """Starting point from ``[[Q, Aᵀ, Gᵀ], [A, 0, 0], [G, 0, −I]]·(x, y, z) = (−q, b, h)``.

    With unit ``s`` and ``z`` the standard KKT system is exactly this one
    (``Δs = −Δz``), so it reuses :class:`StandardKkt`.
    """
    p = problem.p
    ws = StandardKkt(problem, np.ones(p), np.ones(p))
    x, s, z, y = ws.solve(-problem.q, np.zeros(p), problem.h, problem.b)
    s, z = shift_to_interior(-z, z)
    return PrimalDualIterate(x, s, z, y)


def initialize_elastic(problem: ElasticProblem) -> ElasticIterate:
    """Closed-form minimizer of the elastic problem with quadratic slack penalties.

    ``x = (Q + ½GᵀG)⁻¹(−q − ½Gᵀ(ρ − h))``, ``z2 = ½(Gx + ρ − h)``,
    ``z1 = ρ − z2``, ``t = −z1``; then ``s = −z`` and both are shifted inside
    the positive orthant.
    """
    Q, q, G, h, rho = problem.Q, problem.q, problem.G, problem.h, problem.rho
    p = problem.p
    factor = factor_pd(Q + 0.5 * G.T @ G)
    x = solve_pd(factor, -q - 0.5 * G.T @ (rho - h))
    z2 = 0.5 * (G @ x + rho - h)
    z1 = rho - z2
    t = -z1
    s, z = shift_to_interior(-np.concatenate([z1, z2]), np.concatenate([z1, z2]))
    return ElasticIterate(x, t, s[:p], s[p:], z[:p], z[p:])


def _diverged(vec: np.ndarray) -> bool:
    return not np.all(np.isfinite(vec)) or (vec.size and np.abs(vec).max() > DIVERGENCE_LIMIT)


def _step_length(s, ds, z, dz, settings: SolverSettings) -> float:
    if not s.size:
        return 1.0
    return settings.step_scale * min(linesearch(s, ds), linesearch(z, dz))


def _centering(s, z, ds_aff, dz_aff):
    """Return ``σμ`` for the corrector right-hand side."""
    alpha = min(linesearch(s, ds_aff), linesearch(z, dz_aff))
    gap = s @ z
    mu = gap / len(s)
    sigma = ((s + alpha * ds_aff) @ (z + alpha * dz_aff) / gap) ** 3
    return sigma * mu


def solve_qp(
    problem: QpProblem,
    settings: Optional[SolverSettings] = None,
    callback: Optional[Callable[[int, PrimalDualIterate], None]] = None,
) -> SolveResult:
    """Solve a standard-form QP.

    ``callback(k, iterate)`` is invoked after every accepted step. Failures are
    reported through ``status`` rather than raised.
    """
    settings = settings or SolverSettings()
    n, m, p = problem.n, problem.m, problem.p
    factorizations = 0
    try:
        it = initialize_qp(problem)
        factorizations += 1 + (m > 0)
    except (NotPositiveDefinite, DivisionNearZero) as exc:
        zeros = PrimalDualIterate(np.zeros(n), np.ones(p), np.ones(p), np.zeros(m))
        return SolveResult(zeros, Status.NUMERICAL_FAILURE, 0, float("inf"), factorizations, str(exc))

    res = float("inf")
    for k in range(settings.max_iters + 1):
        r1, r2, r3, r4 = standard_residuals(problem, it)
        res = inf_norm(r1, r2, r3, r4)
        if res < settings.tol:
            return SolveResult(it, Status.CONVERGED, k, res, factorizations)
        if k == settings.max_iters:
            break
        x, s, z, y = it.x, it.s, it.z, it.y
        try:
            ws = StandardKkt(problem, s, z)
            factorizations += ws.factorizations
            dx, ds, dz, dy = ws.solve(-r1, -r2, -r3, -r4)
            if p:
                sigma_mu = _centering(s, z, ds, dz)
                r2c = r2 - sigma_mu + ds * dz
                dx, ds, dz, dy = ws.solve(-r1, -r2c, -r3, -r4)
        except (NotPositiveDefinite, DivisionNearZero) as exc:
            return SolveResult(it, Status.NUMERICAL_FAILURE, k, res, factorizations, str(exc))
        alpha = _step_length(s, ds, z, dz, settings)
        it = PrimalDualIterate(x + alpha * dx, s + alpha * ds, z + alpha * dz, y + alpha * dy)
        if _diverged(it.vector()) or (p and (it.s.min() <= 0 or it.z.min() <= 0)):
            return SolveResult(it, Status.NUMERICAL_FAILURE, k + 1, res, factorizations,
                               "iterate diverged or left the interior")
        if callback is not None:
            callback(k + 1, it)
    log.debug("solve_qp hit max_iters=%d with residual %.3e", settings.max_iters, res)
    return SolveResult(it, Status.MAX_ITERS, settings.max_iters, res, factorizations)


def solve_qp_elastic(
    problem: ElasticProblem,
    settings: Optional[SolverSettings] = None,
    callback: Optional[Callable[[int, ElasticIterate], None]] = None,
) -> SolveResult:
    """Solve the always-feasible ℓ1-penalized QP.

    There is no infeasible outcome: any problem with ``ρ > 0`` has a minimizer.
    """
    settings = settings or SolverSettings()
    n, p = problem.n, problem.p
    factorizations = 0
    try:
        it = initialize_elastic(problem)
        factorizations += 1
    except (NotPositiveDefinite, DivisionNearZero) as exc:
        ones, zeros = np.ones(p), np.zeros(p)
        dummy = ElasticIterate(np.zeros(n), zeros, ones, ones, ones, ones)
        return SolveResult(dummy, Status.NUMERICAL_FAILURE, 0, float("inf"), factorizations, str(exc))

    res = float("inf")
    for k in range(settings.max_iters + 1):
        r1, r2, r3, r4, r5, r6 = elastic_residuals(problem, it)
        res = inf_norm(r1, r2, r3, r4, r5, r6)
        if res < settings.tol:
            return SolveResult(it, Status.CONVERGED, k, res, factorizations)
        if k == settings.max_iters:
            break
        try:
            ws = ElasticKkt(problem, it.s1, it.s2, it.z1, it.z2)
            factorizations += ws.factorizations
            dx, dt, ds1, ds2, dz1, dz2 = ws.solve(-r1, -r2, -r3, -r4, -r5, -r6)
            s, z = it.s, it.z
            if p:
                sigma_mu = _centering(s, z, np.concatenate([ds1, ds2]), np.concatenate([dz1, dz2]))
                r3c = r3 - sigma_mu + ds1 * dz1
                r4c = r4 - sigma_mu + ds2 * dz2
                dx, dt, ds1, ds2, dz1, dz2 = ws.solve(-r1, -r2, -r3c, -r4c, -r5, -r6)
        except (NotPositiveDefinite, DivisionNearZero) as exc:
            return SolveResult(it, Status.NUMERICAL_FAILURE, k, res, factorizations, str(exc))
        alpha = _step_length(s, np.concatenate([ds1, ds2]), z, np.concatenate([dz1, dz2]), settings)
        it = ElasticIterate(
            it.x + alpha * dx,
            it.t + alpha * dt,
            it.s1 + alpha * ds1,
            it.s2 + alpha * ds2,
            it.z1 + alpha * dz1,
            it.z2 + alpha * dz2,
        )
        if _diverged(it.vector()) or (p and (it.s.min() <= 0 or it.z.min() <= 0)):
            return SolveResult(it, Status.NUMERICAL_FAILURE, k + 1, res, factorizations,
                               "iterate diverged or left the interior")
        if callback is not None:
            callback(k + 1, it)
    log.debug("solve_qp_elastic hit max_iters=%d with residual %.3e", settings.max_iters, res)
    return SolveResult(it, Status.MAX_ITERS, settings.max_iters, res, factorizations)


def solve(problem, settings: Optional[SolverSettings] = None, callback=None) -> SolveResult:
    """Dispatch to :func:`solve_qp` or :func:`solve_qp_elastic` by problem type."""
    if isinstance(problem, ElasticProblem):
        return solve_qp_elastic(problem, settings, callback)
    return solve_qp(problem, settings, callback)
