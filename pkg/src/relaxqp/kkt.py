"""Block-elimination solvers for the structured KKT systems.

Standard system, unknowns ``(Δx, Δs, Δz, Δy)``::

    [ Q   0     Gᵀ    Aᵀ ] [Δx]   [u1]
    [ 0   D(z)  D(s)  0  ] [Δs] = [u2]
    [ G   I     0     0  ] [Δz]   [u3]
    [ A   0     0     0  ] [Δy]   [u4]

Rows 2 and 3 give ``Δs = u3 − GΔx`` and ``Δz = (u2 − z⊙Δs) ⊘ s``.
Substituting into row 1 leaves ``HΔx + AᵀΔy = u1 + GᵀP⁻¹(u3 − u2⊘z)``
with ``P = D(s⊘z)`` and ``H = Q + GᵀP⁻¹G``; row 4 then gives the Schur
complement ``F = AH⁻¹Aᵀ`` for ``Δy``.

Elastic system, unknowns ``(Δx, Δt, Δs1, Δs2, Δz1, Δz2)``::

    QΔx + GᵀΔz2 = r1          −Δz1 − Δz2 = r2
    Z1Δs1 + S1Δz1 = r3        Z2Δs2 + S2Δz2 = r4
    −Δt + Δs1 = r5            GΔx − Δt + Δs2 = r6

Rows 3 and 4 give ``Δs_k = w_k − a_k⊙Δz_k`` with ``w_k = r_{k+2}⊘z_k`` and
``a_k = s_k⊘z_k``. Eliminating ``Δt = Δs1 − r5`` and ``Δz1 = −r2 − Δz2``
from row 6 yields ``(a1 + a2)⊙Δz2 = GΔx + p1`` where
``p1 = r5 − r6 + w2 − w1 − a1⊙r2``; row 1 then needs only
``Q + GᵀA3⁻¹G`` with ``A3 = D(a1 + a2)``. This pins down ``a1 = s1⊘z1``
and ``a2 = s2⊘z2``.
"""
from __future__ import annotations

import numpy as np

from .dense import div, factor_pd, solve_pd
from .problem import ElasticIterate, ElasticProblem, PrimalDualIterate, QpProblem

# The fraction-to-boundary rule keeps slacks and duals strictly positive, and
# tightly converged iterates routinely carry entries near 1e-15. Only guard
# against values that would overflow the scaled blocks.
KKT_DIV_FLOOR = 1e-30


class StandardKkt:
    """Factorizations of ``H`` and ``F`` for one ``(s, z)`` pair.

    Build once per interior-point iteration and call :meth:`solve` for each
    right-hand side.
    """

    def __init__(self, problem: QpProblem, s, z):
        self.problem = problem
        self.s = np.asarray(s, dtype=float)
        self.z = np.asarray(z, dtype=float)
        Q, G, A = problem.Q, problem.G, problem.A
        # P⁻¹ = D(z ⊘ s)
        self.p_inv = div(self.z, self.s, KKT_DIV_FLOOR)
        self.H = Q + (G.T * self.p_inv) @ G
        self.H_factor = factor_pd(self.H)
        self.factorizations = 1
        self.F_factor = None
        if problem.m:
            self.H_inv_At = solve_pd(self.H_factor, A.T)
            F = A @ self.H_inv_At
            self.F_factor = factor_pd(0.5 * (F + F.T))
            self.factorizations += 1

    def solve(self, u1, u2, u3, u4):
        A, G = self.problem.A, self.problem.G
        s, z = self.s, self.z
        r2 = u3 - div(u2, z, KKT_DIV_FLOOR)
        p1 = u1 + G.T @ (self.p_inv * r2)
        if self.F_factor is not None:
            H_inv_p1 = solve_pd(self.H_factor, p1)
            dy = solve_pd(self.F_factor, A @ H_inv_p1 - u4)
            dx = H_inv_p1 - self.H_inv_At @ dy
        else:
            dy = np.zeros(0)
            dx = solve_pd(self.H_factor, p1)
        ds = u3 - G @ dx
        dz = div(u2 - z * ds, s, KKT_DIV_FLOOR)
        return dx, ds, dz, dy


class ElasticKkt:
    """Single ``n×n`` factorization of ``Q + GᵀA3⁻¹G`` for one iterate."""

    def __init__(self, problem: ElasticProblem, s1, s2, z1, z2):
        self.problem = problem
        self.s1, self.s2 = np.asarray(s1, dtype=float), np.asarray(s2, dtype=float)
        self.z1, self.z2 = np.asarray(z1, dtype=float), np.asarray(z2, dtype=float)
        self.a1 = div(self.s1, self.z1, KKT_DIV_FLOOR)
        self.a2 = div(self.s2, self.z2, KKT_DIV_FLOOR)
        self.a3 = self.a1 + self.a2
        G = problem.G
        self.M = problem.Q + (G.T / self.a3) @ G
        self.M_factor = factor_pd(self.M)
        self.factorizations = 1

    def solve(self, r1, r2, r3, r4, r5, r6):
        G = self.problem.G
        s1, s2, z1, z2 = self.s1, self.s2, self.z1, self.z2
        w1 = div(r3, z1, KKT_DIV_FLOOR)
        w2 = div(r4, z2, KKT_DIV_FLOOR)
        p1 = r5 - r6 + w2 - w1 - self.a1 * r2
        dx = solve_pd(self.M_factor, r1 - G.T @ (p1 / self.a3))
        dz2 = (p1 + G @ dx) / self.a3
        dz1 = -r2 - dz2
        ds1 = (r3 - s1 * dz1) / z1
        ds2 = (r4 - s2 * dz2) / z2
        dt = ds1 - r5
        return dx, dt, ds1, ds2, dz1, dz2


def build_standard_workspace(problem: QpProblem, s, z) -> StandardKkt:
    return StandardKkt(problem, s, z)


def solve_kkt(ws: StandardKkt, u1, u2, u3, u4):
    return ws.solve(u1, u2, u3, u4)


def build_elastic_workspace(problem: ElasticProblem, s1, s2, z1, z2) -> ElasticKkt:
    return ElasticKkt(problem, s1, s2, z1, z2)


def elastic_kkt(ws: ElasticKkt, r1, r2, r3, r4, r5, r6):
    return ws.solve(r1, r2, r3, r4, r5, r6)


def standard_residuals(problem: QpProblem, it: PrimalDualIterate, kappa: float = 0.0):
    """Stationarity, (relaxed) complementarity and both primal feasibility rows."""
    Q, q, A, b, G, h = problem.Q, problem.q, problem.A, problem.b, problem.G, problem.h
    r1 = Q @ it.x + q + A.T @ it.y + G.T @ it.z
    r2 = it.s * it.z - kappa
    r3 = G @ it.x + it.s - h
    r4 = A @ it.x - b
    return r1, r2, r3, r4


def elastic_residuals(problem: ElasticProblem, it: ElasticIterate, kappa: float = 0.0):
    Q, q, G, h, rho = problem.Q, problem.q, problem.G, problem.h, problem.rho
    r1 = Q @ it.x + q + G.T @ it.z2
    r2 = -it.z1 - it.z2 + rho
    r3 = it.s1 * it.z1 - kappa
    r4 = it.s2 * it.z2 - kappa
    r5 = -it.t + it.s1
    r6 = G @ it.x - it.t + it.s2 - h
    return r1, r2, r3, r4, r5, r6


def inf_norm(*vectors) -> float:
    return max((float(np.abs(v).max()) for v in vectors if v.size), default=0.0)
