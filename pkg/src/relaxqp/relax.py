"""Move a converged primal-dual solution onto the barrier central path.

Going from a small duality measure up to a larger ``κ`` is easy: plain
Newton steps on the perturbed KKT conditions (``s ⊙ z = κ``) with the usual
fraction-to-boundary safeguard converge in a handful of iterations. Going
down is the solver's job, so ``κ`` below the current duality measure is
rejected.
"""
from __future__ import annotations

from typing import Optional

import numpy as np

from .errors import DivisionNearZero, KappaBelowCurrent, NotPositiveDefinite, RelaxationFailed
from .kkt import ElasticKkt, StandardKkt, elastic_residuals, inf_norm, standard_residuals
from .pdip import _diverged
from .problem import (
    ElasticIterate,
    ElasticProblem,
    PrimalDualIterate,
    QpProblem,
    SolveResult,
    SolverSettings,
    Status,
)


def _newton_step(s, ds, z, dz, settings: SolverSettings) -> float:
    """Full step when it keeps every entry above ``1 − step_scale`` of its value.

    Scaling every step by ``step_scale`` would cap Newton at linear
    convergence (residual times 0.02 per step), which is what makes large
    upward jumps in ``κ`` slow.
    """
    v, dv = np.concatenate([s, z]), np.concatenate([ds, dz])
    neg = dv < 0
    if not neg.any():
        return 1.0
    return float(min(1.0, settings.step_scale * np.min(-v[neg] / dv[neg])))


def _check_kappa(iterate, kappa: float) -> None:
    if not kappa > 0:
        raise ValueError("kappa must be positive")
    if np.any(iterate.s <= 0) or np.any(iterate.z <= 0):
        raise ValueError("relaxation needs strictly positive slacks and duals")
    mu = iterate.duality_measure
    if kappa < mu:
        raise KappaBelowCurrent(kappa, mu)


def relax_qp(
    problem: QpProblem,
    iterate: PrimalDualIterate,
    kappa: float,
    settings: Optional[SolverSettings] = None,
) -> SolveResult:
    """Newton-solve the relaxed KKT conditions starting from ``iterate``.

    Returns a converged SolveResult; raises RelaxationFailed otherwise.
    """
    settings = settings or SolverSettings()
    _check_kappa(iterate, kappa)
    it = iterate
    factorizations = 0
    for k in range(settings.relax_max_iters + 1):
        r1, r2, r3, r4 = standard_residuals(problem, it, kappa)
        res = inf_norm(r1, r2, r3, r4)
        if res < settings.tol:
            return SolveResult(it, Status.CONVERGED, k, res, factorizations)
        if k == settings.relax_max_iters:
            break
        try:
            ws = StandardKkt(problem, it.s, it.z)
            factorizations += ws.factorizations
            dx, ds, dz, dy = ws.solve(-r1, -r2, -r3, -r4)
        except (NotPositiveDefinite, DivisionNearZero) as exc:
            raise RelaxationFailed(Status.NUMERICAL_FAILURE, str(exc)) from exc
        alpha = _newton_step(it.s, ds, it.z, dz, settings)
        it = PrimalDualIterate(it.x + alpha * dx, it.s + alpha * ds, it.z + alpha * dz, it.y + alpha * dy)
        if _diverged(it.vector()):
            raise RelaxationFailed(Status.NUMERICAL_FAILURE, "relaxation diverged")
    raise RelaxationFailed(
        Status.MAX_ITERS,
        f"relaxation to kappa={kappa:.3e} not converged after {settings.relax_max_iters} steps "
        f"(residual {res:.3e})",
    )


def relax_qp_elastic(
    problem: ElasticProblem,
    iterate: ElasticIterate,
    kappa: float,
    settings: Optional[SolverSettings] = None,
) -> SolveResult:
    """Elastic counterpart of :func:`relax_qp`; both complementarity rows target ``κ``."""
    settings = settings or SolverSettings()
    _check_kappa(iterate, kappa)
    it = iterate
    factorizations = 0
    for k in range(settings.relax_max_iters + 1):
        r = elastic_residuals(problem, it, kappa)
        res = inf_norm(*r)
        if res < settings.tol:
            return SolveResult(it, Status.CONVERGED, k, res, factorizations)
        if k == settings.relax_max_iters:
            break
        try:
            ws = ElasticKkt(problem, it.s1, it.s2, it.z1, it.z2)
            factorizations += 1
            dx, dt, ds1, ds2, dz1, dz2 = ws.solve(*(-v for v in r))
        except (NotPositiveDefinite, DivisionNearZero) as exc:
            raise RelaxationFailed(Status.NUMERICAL_FAILURE, str(exc)) from exc
        alpha = _newton_step(
            it.s, np.concatenate([ds1, ds2]), it.z, np.concatenate([dz1, dz2]), settings
        )
        it = ElasticIterate(
            it.x + alpha * dx,
            it.t + alpha * dt,
            it.s1 + alpha * ds1,
            it.s2 + alpha * ds2,
            it.z1 + alpha * dz1,
            it.z2 + alpha * dz2,
        )
        if _diverged(it.vector()):
            raise RelaxationFailed(Status.NUMERICAL_FAILURE, "relaxation diverged")
    raise RelaxationFailed(
        Status.MAX_ITERS,
        f"elastic relaxation to kappa={kappa:.3e} not converged after "
        f"{settings.relax_max_iters} steps (residual {res:.3e})",
    )


def relax(problem, iterate, kappa: float, settings: Optional[SolverSettings] = None) -> SolveResult:
    if isinstance(problem, ElasticProblem):
        return relax_qp_elastic(problem, iterate, kappa, settings)
    return relax_qp(problem, iterate, kappa, settings)
