import numpy as np
import pytest

from blockkaczmarz.system import MixedSystem, gen_gaussian_system, standardize


def gaussian_standardized(rng, n, d):
    G = rng.standard_normal((n, d))
    return G / np.linalg.norm(G, axis=1)[:, None]


def obtuse_rows(rng, k, d, weight=0.15, tries=100):
    """`k` unit rows in R^d whose pairwise inner products are all <= 0.

    Built as q_i - sum_j W_ij q_j over a random orthonormal frame with small
    nonnegative W, then checked.
    """
    for _ in range(tries):
        Q = np.linalg.qr(rng.standard_normal((d, k)))[0].T
        W = weight * rng.random((k, k))
        np.fill_diagonal(W, 0.0)
        R = Q - W @ Q
        R /= np.linalg.norm(R, axis=1)[:, None]
        G = R @ R.T
        np.fill_diagonal(G, 0.0)
        if np.all(G <= 0):
            return R
    raise RuntimeError("could not build obtuse rows")


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def mixed_small():
    """8 x 4 mixed system (5 equalities, 3 inequalities) and its planted point."""
    return gen_gaussian_system(8, 4, 5, seed=4, slack=0.3)


@pytest.fixture
def halfplane():
    """Single inequality x_1 <= 2 in the plane."""
    return MixedSystem(np.array([[1.0, 0.0]]), np.array([2.0]), 0)


def system_from(A, b, n_e):
    A, b = standardize(A, b)
    return MixedSystem(A, b, n_e)
