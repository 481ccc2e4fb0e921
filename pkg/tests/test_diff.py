import math

import numpy as np
import pytest

from oracles import random_elastic, random_qp
from relaxqp import (
    ElasticProblem,
    QpProblem,
    compute_elastic_qp_grads,
    compute_grads,
    compute_qp_grads,
    differentiate,
    fd_gradients,
    solve_and_relax,
)
from relaxqp.diff import gradient_deviation, relative_error


def relaxed_dx_dh(h, kappa):
    # x(x + h) = κ  →  x = (−h + √(h² + 4κ))/2
    return 0.5 * (-1.0 + h / math.sqrt(h * h + 4 * kappa))


def test_zero_seed(rng):
    for problem in (random_qp(rng, 4, 1, 3), random_elastic(rng, 4, 3)):
        _, relaxed = solve_and_relax(problem, 1e-2)
        for block in compute_grads(problem, relaxed.iterate, np.zeros(4)).blocks().values():
            assert not np.any(block)
        for block in fd_gradients(problem, np.zeros(4), 1e-2).blocks().values():
            assert not np.any(block)


def test_one_d_active_sensitivity(one_d):
    _, _, grads = differentiate(one_d, [1.0], kappa=1e-6)
    assert grads.h[0] == pytest.approx(-1.0, abs=1e-3)
    assert grads.h[0] == pytest.approx(relaxed_dx_dh(-1.0, 1e-6), abs=1e-8)


def test_one_d_closed_form_kappa(one_d):
    expected = relaxed_dx_dh(-1.0, 1e-2)
    _, _, grads = differentiate(one_d, [1.0], kappa=1e-2)
    assert grads.h[0] == pytest.approx(expected, abs=1e-8)
    assert fd_gradients(one_d, [1.0], 1e-2).h[0] == pytest.approx(expected, abs=1e-7)


def test_unconstrained_q_gradient():
    problem = QpProblem(np.eye(2), [0.3, -0.2])
    _, _, grads = differentiate(problem, [1.0, 0.0], kappa=1e-2)
    assert np.allclose(grads.q, [-1.0, 0.0], atol=1e-12)
    assert np.allclose(fd_gradients(problem, [1.0, 0.0], 1e-2).q, [-1.0, 0.0], atol=1e-6)


def test_unconstrained_matches_inverse(rng):
    B = rng.standard_normal((3, 3))
    problem = QpProblem(B.T @ B + np.eye(3), rng.standard_normal(3))
    seed = rng.standard_normal(3)
    fd = fd_gradients(problem, seed, 1e-2)
    assert np.allclose(fd.q, -np.linalg.solve(problem.Q, seed), atol=1e-6)


def test_seed_linearity_and_symmetry(rng):
    problem = random_qp(rng, 6, 2, 5)
    _, relaxed = solve_and_relax(problem, 1e-3)
    a, b = rng.standard_normal(6), rng.standard_normal(6)
    ga = compute_qp_grads(problem, relaxed.iterate, a).blocks()
    gb = compute_qp_grads(problem, relaxed.iterate, b).blocks()
    gc = compute_qp_grads(problem, relaxed.iterate, 2 * a - 0.5 * b).blocks()
    for name in ga:
        assert np.abs(gc[name] - (2 * ga[name] - 0.5 * gb[name])).max(initial=0) <= 1e-10
    assert np.array_equal(ga["Q"], ga["Q"].T)


def test_elastic_symmetry_and_rho_block(rng):
    problem = random_elastic(rng, 5, 4)
    _, relaxed = solve_and_relax(problem, 1e-3)
    grads = compute_elastic_qp_grads(problem, relaxed.iterate, rng.standard_normal(5))
    assert np.array_equal(grads.Q, grads.Q.T)
    assert grads.A.shape == (0, 5) and grads.b.shape == (0,)
    assert grads.rho.shape == (4,)


def test_elastic_matches_standard_under_exact_penalty(one_d):
    elastic = ElasticProblem.from_qp(one_d, 100.0)
    _, _, std = differentiate(one_d, [1.0], kappa=1e-4)
    _, _, ela = differentiate(elastic, [1.0], kappa=1e-4)
    for name in ("Q", "q", "G", "h"):
        assert relative_error(ela.blocks()[name], std.blocks()[name]) <= 1e-4


def test_infeasible_pair_against_fd(infeasible_pair):
    _, _, grads = differentiate(infeasible_pair, [1.0], kappa=1e-3)
    fd = fd_gradients(infeasible_pair, [1.0], 1e-3)
    assert max(gradient_deviation(grads, fd).values()) <= 1e-4


@pytest.mark.parametrize("seed", range(3))
def test_random_against_fd(seed):
    rng = np.random.default_rng(seed)
    for problem in (random_qp(rng, 5, 2, 4), random_elastic(rng, 4, 3)):
        loss = rng.standard_normal(problem.n)
        _, _, grads = differentiate(problem, loss, kappa=1e-3)
        fd = fd_gradients(problem, loss, 1e-3)
        assert max(gradient_deviation(grads, fd).values()) <= 1e-4


def test_fd_nonlinear_loss(rng):
    problem = random_qp(rng, 3, 1, 2)
    target = rng.standard_normal(3)
    solved, relaxed = solve_and_relax(problem, 1e-2)
    x = relaxed.iterate.x
    grads = compute_qp_grads(problem, relaxed.iterate, x - target)
    fd = fd_gradients(problem, kappa=1e-2, loss=lambda v: 0.5 * float((v - target) @ (v - target)))
    assert max(gradient_deviation(grads, fd).values()) <= 1e-4


def test_relative_error_floor():
    assert relative_error([1e-7], [0.0]) == pytest.approx(1e-5)
    assert relative_error([1.0 + 1e-5], [1.0]) == pytest.approx(1e-5)
    assert relative_error(np.zeros((0, 3)), np.zeros((0, 3))) == 0.0
