import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from relaxqp.dense import axpy, div, factor_pd, mul, solve_pd
from relaxqp.errors import DimensionMismatch, DivisionNearZero, NotPositiveDefinite


@pytest.mark.parametrize(
    "M, r, x",
    [
        (np.eye(3), [1, 2, 3], [1, 2, 3]),
        ([[4.0]], [8.0], [2.0]),
        ([[2.0, 1.0], [1.0, 2.0]], [3.0, 3.0], [1.0, 1.0]),
        (np.eye(2), [0.0, 0.0], [0.0, 0.0]),
        (np.diag([2.0, 2.0]), [2.0, 4.0], [1.0, 2.0]),
    ],
)
def test_small_solves(M, r, x):
    assert np.allclose(solve_pd(factor_pd(np.asarray(M, float)), r), x, atol=1e-14)


def test_random_residual(rng):
    B = rng.standard_normal((5, 5))
    M = B.T @ B + np.eye(5)
    r = rng.standard_normal(5)
    x = solve_pd(factor_pd(M), r)
    assert np.abs(M @ x - r).max() <= 1e-10 * np.abs(r).max()


def test_matrix_right_hand_side(rng):
    M = np.diag([1.0, 2.0, 4.0])
    R = rng.standard_normal((3, 2))
    assert np.allclose(solve_pd(factor_pd(M), R), R / np.diag(M)[:, None])


@settings(max_examples=50, deadline=None)
@given(n=st.integers(1, 20), seed=st.integers(0, 2**32 - 1))
def test_spd_residual_property(n, seed):
    rng = np.random.default_rng(seed)
    B = rng.standard_normal((n, n))
    M = B.T @ B + np.eye(n)
    r = rng.standard_normal(n)
    x = solve_pd(factor_pd(M), r)
    assert np.abs(M @ x - r).max() <= 1e-9 * (1 + np.abs(r).max())


@pytest.mark.parametrize("M", [[[1.0, 0.0], [0.0, -1.0]], [[0.0]], [[1.0, 1.0], [1.0, 1.0]]])
def test_not_positive_definite(M):
    with pytest.raises(NotPositiveDefinite):
        factor_pd(np.array(M))


def test_rejects_nonsquare_and_asymmetric():
    with pytest.raises(ValueError):
        factor_pd(np.ones((2, 3)))
    with pytest.raises(ValueError):
        factor_pd(np.array([[1.0, 2.0], [0.0, 1.0]]))


def test_solve_length_mismatch():
    with pytest.raises(DimensionMismatch):
        solve_pd(factor_pd(np.eye(2)), [1.0, 2.0, 3.0])


def test_elementwise():
    assert np.array_equal(mul([1, 2], [3, 4]), [3, 8])
    assert np.array_equal(div([6, 8], [2, 4]), [3, 2])
    v = np.array([0.3, 7.0, 1e-3])
    assert np.array_equal(div(v, v), np.ones(3))
    assert np.array_equal(axpy(2.0, [1, 1], [0, 1]), [2, 3])


def test_elementwise_errors():
    with pytest.raises(DimensionMismatch):
        mul([1, 2], [1])
    with pytest.raises(DivisionNearZero):
        div([1.0, 1.0], [1.0, 1e-16])
