import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from blockkaczmarz.linalg import (
    as_matrix,
    gram_max_eigenvalue,
    lsq_min_norm,
    min_singular_value,
    pinv,
    row_norms,
    spectral_norm,
)

from conftest import gaussian_standardized


@pytest.mark.parametrize(
    "A, expected",
    [(np.eye(2), [1.0, 1.0]), ([[3.0, 4.0]], [5.0]), ([[0.0, 0.0]], [0.0])],
)
def test_row_norms(A, expected):
    np.testing.assert_array_equal(row_norms(A), expected)


def test_min_singular_value_trivial():
    assert min_singular_value(np.eye(3)) == pytest.approx(1.0, abs=1e-15)
    assert min_singular_value(np.diag([2.0, 0.5])) == pytest.approx(0.5, abs=1e-15)


def test_min_singular_value_matches_gram_eigenvalues():
    A = gaussian_standardized(np.random.default_rng(7), 6, 3)
    oracle = np.sqrt(np.linalg.eigvalsh(A.T @ A)[0])
    assert abs(min_singular_value(A) - oracle) < 1e-10


def test_min_singular_value_wide_is_zero():
    assert min_singular_value(np.ones((2, 5))) == 0.0


def test_spectral_norm():
    assert spectral_norm(np.eye(4)) == pytest.approx(1.0)
    assert spectral_norm(np.diag([2.0, 0.5])) == pytest.approx(2.0)
    rng = np.random.default_rng(0)
    u = rng.standard_normal(5)
    v = rng.standard_normal(3)
    u /= np.linalg.norm(u)
    v /= np.linalg.norm(v)
    assert spectral_norm(np.outer(u, v)) == pytest.approx(1.0, abs=1e-14)


def test_lsq_min_norm_examples():
    np.testing.assert_allclose(lsq_min_norm(np.eye(2), [1.0, 2.0]), [1.0, 2.0], atol=1e-15)
    np.testing.assert_allclose(
        lsq_min_norm([[1.0, 0, 0], [0, 1.0, 0]], [1.0, 1.0]), [1.0, 1.0, 0.0], atol=1e-15
    )
    # rank one: A = u s v^T with u = (1,1)/sqrt2, s = sqrt2, v = e1, so pinv(A) r = e1 (u.r)/s
    np.testing.assert_allclose(lsq_min_norm([[1.0, 0], [1.0, 0]], [1.0, 1.0]), [1.0, 0.0], atol=1e-15)


def test_lsq_min_norm_zero_matrix():
    np.testing.assert_array_equal(lsq_min_norm(np.zeros((2, 3)), [1.0, 2.0]), np.zeros(3))


def test_lsq_min_norm_cutoff_drops_tiny_singular_values():
    A = np.array([[1.0, 0.0], [0.0, 1e-14]])
    np.testing.assert_allclose(lsq_min_norm(A, [1.0, 1.0]), [1.0, 0.0])


def test_gram_max_eigenvalue():
    Q = np.linalg.qr(np.random.default_rng(1).standard_normal((6, 3)))[0].T
    assert gram_max_eigenvalue(Q) == pytest.approx(1.0, abs=1e-14)
    a = np.array([0.6, 0.8])
    assert gram_max_eigenvalue(np.vstack([a, a])) == pytest.approx(2.0, abs=1e-14)
    B = gaussian_standardized(np.random.default_rng(3), 10, 100)
    oracle = np.linalg.eigvalsh(B @ B.T)[-1]
    assert abs(gram_max_eigenvalue(B) - oracle) < 1e-10


def test_as_matrix_rejects_bad_input():
    with pytest.raises(ValueError):
        as_matrix(np.zeros((0, 3)))
    with pytest.raises(ValueError):
        as_matrix([[1.0, np.nan]])
    with pytest.raises(ValueError):
        as_matrix([1.0, 2.0])


shapes = st.tuples(st.integers(1, 10), st.integers(1, 20))


@settings(max_examples=60, deadline=None)
@given(shapes, st.integers(0, 2**32 - 1))
def test_pinv_projector_identities(shape, seed):
    rng = np.random.default_rng(seed)
    A = rng.standard_normal(shape)
    P = pinv(A) @ A
    assert np.allclose(P @ P, P, atol=1e-8)
    assert np.allclose(P, P.T, atol=1e-8)
    x = rng.standard_normal(shape[1])
    assert np.allclose(A @ lsq_min_norm(A, A @ x), A @ x, atol=1e-8)


@settings(max_examples=60, deadline=None)
@given(shapes, st.integers(0, 2**32 - 1))
def test_spectral_quantities_match_eigenvalues(shape, seed):
    A = np.random.default_rng(seed).standard_normal(shape)
    ev = np.linalg.eigvalsh(A.T @ A)
    assert abs(spectral_norm(A) ** 2 - ev[-1]) < 1e-10 * max(1.0, ev[-1])
    assert abs(gram_max_eigenvalue(A) - spectral_norm(A) ** 2) < 1e-10 * max(1.0, ev[-1])
    if shape[0] >= shape[1]:
        assert abs(min_singular_value(A) ** 2 - max(ev[0], 0.0)) < 1e-10 * max(1.0, ev[-1])
