"""Desk-scale versions of the contact-dynamics and collision experiments.

Block contact
    One velocity-space time step for a 2-D block resting on the ground::

        min_v  ½·m·‖v − v_free‖²   s.t.   μ·vx − vy ≤ 0,  −μ·vx − vy ≤ 0

    with ``v_free = dt·(f/m − g·e_y)``. This is the convex (Anitescu-style)
    relaxation of Coulomb contact: ``v`` is the projection of ``v_free`` onto
    the cone ``vy ≥ μ|vx|``, which is zero exactly when
    ``|fx| ≤ μ(m·g − fy)`` and ``fy ≤ m·g``. Above either threshold the
    velocity is affine in the force. Sliding also lifts the block
    (``vy = μ|vx|``), a known artifact of the relaxation that does not
    affect the threshold behaviour.

Collision
    Closest points between polytopes ``A_i(p_i − c_i) ≤ b_i``::

        min ‖p1 − p2‖²   s.t.   A1 p1 ≤ b1 + A1 c1,   A2 p2 ≤ b2 + A2 c2

    The contact normal is the normalized gradient of the squared distance
    with respect to the translation ``c2`` of the second body.
"""
from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy.linalg import block_diag

from .diff import compute_qp_grads, solve_and_relax
from .pdip import solve_qp
from .problem import QpProblem, SolverSettings

# κ ≈ 0 runs need the solver tolerance well below κ so relaxation starts under it.
TIGHT = SolverSettings(tol=1e-10, max_iters=60, relax_max_iters=40)


def demo_settings(kappa: float) -> SolverSettings:
    tol = min(1e-8, 0.01 * kappa)
    return dataclasses.replace(TIGHT, tol=tol, kappa=kappa)


@dataclass(frozen=True)
class BlockParams:
    mass: float = 1.0  # kg
    gravity: float = 9.81  # m/s²
    friction: float = 0.5
    timestep: float = 0.1  # s
    force: tuple = (0.0, 0.0)  # N

    def __post_init__(self):
        if not self.mass > 0 or not self.timestep > 0 or not self.friction >= 0:
            raise ValueError("need mass > 0, timestep > 0, friction >= 0")

    @property
    def sliding_threshold(self) -> float:
        """Horizontal force needed to start sliding with no vertical load."""
        return self.friction * self.mass * self.gravity

    @property
    def lift_threshold(self) -> float:
        return self.mass * self.gravity

    def with_force(self, fx: float, fy: float) -> "BlockParams":
        return dataclasses.replace(self, force=(float(fx), float(fy)))


def build_block_contact_qp(params: BlockParams) -> QpProblem:
    m, mu, dt = params.mass, params.friction, params.timestep
    f = np.asarray(params.force, dtype=float)
    v_free = dt * (f / m - np.array([0.0, params.gravity]))
    G = np.array([[mu, -1.0], [-mu, -1.0]])
    return QpProblem(Q=m * np.eye(2), q=-m * v_free, G=G, h=np.zeros(2))


def block_velocity(params: BlockParams, kappa: float, settings: Optional[SolverSettings] = None):
    """Next velocity and its Jacobian ``∂v/∂f`` at central-path level ``kappa``.

    The velocity is the tightly solved one; the Jacobian comes from the
    relaxed iterate. Since ``∂q/∂f = −dt·I``, row ``i`` is ``−dt·∇_q v_i``.
    """
    settings = settings or demo_settings(kappa)
    problem = build_block_contact_qp(params)
    solved, relaxed = solve_and_relax(problem, kappa, settings)
    jac = np.empty((2, 2))
    for i in range(2):
        seed = np.zeros(2)
        seed[i] = 1.0
        grads = compute_qp_grads(problem, relaxed.iterate, seed)
        jac[i] = -params.timestep * grads.q
    return solved.iterate.x, jac


def contact_sweep(
    kappa: float,
    points: int = 21,
    params: BlockParams = BlockParams(),
    span: float = 2.0,
):
    """Sweep each force component from 0 to ``span`` times its threshold.

    Yields dict rows with the swept axis, force, velocity along that axis and
    ``∂v/∂f`` along that axis.
    """
    for axis, threshold in (("x", params.sliding_threshold), ("y", params.lift_threshold)):
        k = 0 if axis == "x" else 1
        for force in np.linspace(0.0, span * threshold, points):
            f = [0.0, 0.0]
            f[k] = force
            v, jac = block_velocity(params.with_force(*f), kappa)
            yield {
                "axis": axis,
                "force": float(force),
                "threshold": threshold,
                "velocity": float(v[k]),
                "gradient": float(jac[k, k]),
                "kappa": kappa,
            }


def optimize_force(
    target_velocity: float,
    initial_force: float,
    kappa: float,
    axis: str = "y",
    params: BlockParams = BlockParams(),
    step_size: Optional[float] = None,
    iterations: int = 100,
):
    """Gradient descent on one force component to reach a target velocity.

    Loss is ``½(v − target)²`` on the solved velocity; the gradient uses the
    relaxed sensitivity. Returns the list of ``(force, velocity, loss)``.
    """
    k = 0 if axis == "x" else 1
    if step_size is None:
        # inverse curvature of the loss above threshold
        step_size = (params.mass / params.timestep) ** 2
    force = float(initial_force)
    history = []
    for _ in range(iterations):
        f = [0.0, 0.0]
        f[k] = force
        v, jac = block_velocity(params.with_force(*f), kappa)
        err = v[k] - target_velocity
        history.append((force, float(v[k]), float(0.5 * err**2)))
        force -= float(step_size * err * jac[k, k])
    return history


@dataclass(frozen=True, eq=False)
class Polytope:
    """``{p : A(p − pose) ≤ b}`` in world coordinates."""

    A: np.ndarray
    b: np.ndarray
    pose: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "A", np.array(self.A, dtype=float))
        object.__setattr__(self, "b", np.array(self.b, dtype=float))
        object.__setattr__(self, "pose", np.array(self.pose, dtype=float))

    @property
    def dim(self) -> int:
        return self.A.shape[1]

    @property
    def world_offsets(self) -> np.ndarray:
        return self.b + self.A @ self.pose

    @classmethod
    def square(cls, center, half_width: float = 1.0) -> "Polytope":
        A = np.vstack([np.eye(2), -np.eye(2)])
        return cls(A, np.full(4, half_width), np.asarray(center, dtype=float))

    def moved_to(self, pose) -> "Polytope":
        return dataclasses.replace(self, pose=np.asarray(pose, dtype=float))

    def check(self) -> None:
        """Raise ValueError unless the polytope is nonempty and bounded.

        Nonempty: the projection of the origin onto it converges.
        Bounded: some ``y ≥ 1`` has ``Aᵀy = 0`` (the rows positively span
        space) and ``A`` has full column rank.
        """
        d, k = self.dim, self.A.shape[0]
        inner = solve_qp(QpProblem(np.eye(d), np.zeros(d), G=self.A, h=self.world_offsets))
        if not inner.converged:
            raise ValueError("polytope is empty")
        if np.linalg.matrix_rank(self.A) < d:
            raise ValueError("polytope is unbounded")
        spans = solve_qp(QpProblem(np.eye(k), np.zeros(k), A=self.A.T, b=np.zeros(d),
                                   G=-np.eye(k), h=-np.ones(k)))
        if not spans.converged:
            raise ValueError("polytope is unbounded")


def build_closest_point_qp(P1: Polytope, P2: Polytope) -> QpProblem:
    """QP over stacked ``(p1, p2)`` whose objective is ``‖p1 − p2‖²``."""
    d = P1.dim
    eye = np.eye(d)
    Q = 2.0 * np.block([[eye, -eye], [-eye, eye]])
    return QpProblem(
        Q=Q,
        q=np.zeros(2 * d),
        G=block_diag(P1.A, P2.A),
        h=np.concatenate([P1.world_offsets, P2.world_offsets]),
    )


def closest_points(P1: Polytope, P2: Polytope, settings: Optional[SolverSettings] = None):
    d = P1.dim
    result = solve_qp(build_closest_point_qp(P1, P2), settings or TIGHT)
    return result.iterate.x[:d], result.iterate.x[d:], result


def contact_normal(P1: Polytope, P2: Polytope, kappa: float, settings: Optional[SolverSettings] = None):
    """Unit gradient of the relaxed squared distance with respect to ``P2.pose``."""
    d = P1.dim
    problem = build_closest_point_qp(P1, P2)
    _, relaxed = solve_and_relax(problem, kappa, settings or demo_settings(kappa))
    x = relaxed.iterate.x
    gap = x[:d] - x[d:]
    seed = 2.0 * np.concatenate([gap, -gap])
    grads = compute_qp_grads(problem, relaxed.iterate, seed)
    # h2 = b2 + A2·c2
    g = P2.A.T @ grads.h[P1.A.shape[0]:]
    return g / np.linalg.norm(g)


def corner_sweep_poses(steps: int = 101, clearance: float = 1e-3, half_width: float = 1.0):
    """Poses sliding a square diagonally past the top-right corner of another.

    The gaps along x and y always sum to ``clearance``, so the path crosses
    the corner's Voronoi region in a sliver of width ``clearance``. Step
    length along the path is 1% of the edge length (``2·half_width``).
    """
    edge = 2.0 * half_width
    step = 0.01 * edge
    corner = 2.0 * half_width
    # offset by half a step so no sample lands exactly on the corner region
    u = (np.arange(steps) - (steps - 1) / 2 + 0.5) * step / math.sqrt(2.0)
    cx = corner + clearance / 2 + u
    cy = corner + clearance / 2 - u
    return np.column_stack([cx, cy])


def collision_sweep(kappa: float, steps: int = 101, clearance: float = 1e-3):
    """Contact normal along :func:`corner_sweep_poses`; yields dict rows."""
    P1 = Polytope.square([0.0, 0.0])
    P2 = Polytope.square([3.0, 0.0])
    for k, pose in enumerate(corner_sweep_poses(steps, clearance)):
        n = contact_normal(P1, P2.moved_to(pose), kappa)
        yield {
            "step": k,
            "center_x": float(pose[0]),
            "center_y": float(pose[1]),
            "normal_x": float(n[0]),
            "normal_y": float(n[1]),
            "angle_deg": math.degrees(math.atan2(n[1], n[0])),
            "kappa": kappa,
        }
