import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from blockkaczmarz.errors import ZeroRowError
from blockkaczmarz.system import (
    MixedSystem,
    from_rows,
    gen_gaussian_system,
    is_feasible,
    residual,
    residual_norm,
    standardize,
)


def test_standardize_scales_rows_and_rhs():
    A, b = standardize([[3.0, 4.0], [0.0, 2.0]], [5.0, 1.0])
    np.testing.assert_allclose(A, [[0.6, 0.8], [0.0, 1.0]])
    np.testing.assert_allclose(b, [1.0, 0.5])


def test_standardize_zero_row():
    with pytest.raises(ZeroRowError):
        standardize([[1.0, 0.0], [0.0, 0.0]], [1.0, 0.0])


def test_system_requires_unit_rows():
    with pytest.raises(ValueError):
        MixedSystem(np.array([[2.0, 0.0]]), np.array([1.0]), 1)
    with pytest.raises(ValueError):
        MixedSystem(np.eye(2), np.ones(2), 3)


def test_system_is_read_only(mixed_small):
    sys, _ = mixed_small
    with pytest.raises(ValueError):
        sys.A[0, 0] = 1.0
    with pytest.raises(ValueError):
        sys.b[0] = 1.0


def test_shape_properties(mixed_small):
    sys, _ = mixed_small
    assert (sys.n, sys.d, sys.n_e, sys.n_i) == (8, 4, 5, 3)
    np.testing.assert_array_equal(sys.eq_rows, np.arange(5))
    np.testing.assert_array_equal(sys.ineq_rows, np.arange(5, 8))
    assert sys.A_eq.shape == (5, 4) and sys.A_ineq.shape == (3, 4)


def test_from_rows_moves_equalities_first():
    A = np.array([[1.0, 0.0], [0.0, 2.0], [1.0, 1.0]])
    sys, perm = from_rows(A, [1.0, 2.0, 3.0], [False, True, False])
    np.testing.assert_array_equal(perm, [1, 0, 2])
    assert sys.n_e == 1
    np.testing.assert_allclose(sys.A[0], [0.0, 1.0])
    np.testing.assert_allclose(sys.b, [1.0, 1.0, 3.0 / np.sqrt(2.0)])


def test_residual_map():
    sys = MixedSystem(np.eye(2), np.array([1.0, 1.0]), 1)
    np.testing.assert_array_equal(residual(sys, [3.0, 0.0]), [2.0, 0.0])
    np.testing.assert_array_equal(residual(sys, [0.0, 3.0]), [-1.0, 2.0])
    assert residual_norm(sys, [1.0, 1.0]) == 0.0
    # exactly on the boundary counts as satisfied
    assert is_feasible(sys, [1.0, 1.0])
    assert not is_feasible(sys, [1.0, 1.0 + 1e-6])


def test_planted_point_is_feasible():
    sys, x_star = gen_gaussian_system(30, 6, 12, seed=2, slack=0.5)
    assert is_feasible(sys, x_star)
    r = sys.A_ineq @ x_star - sys.b[sys.n_e :]
    np.testing.assert_allclose(r, -0.5, atol=1e-12)


def test_generator_is_seeded():
    s1, x1 = gen_gaussian_system(10, 3, 4, seed=9)
    s2, x2 = gen_gaussian_system(10, 3, 4, seed=9)
    s3, _ = gen_gaussian_system(10, 3, 4, seed=10)
    assert s1 == s2 and np.array_equal(x1, x2)
    assert not s1 == s3


@settings(max_examples=50, deadline=None)
@given(st.integers(1, 12), st.integers(1, 6), st.data())
def test_residual_zero_iff_feasible(n, d, data):
    n_e = data.draw(st.integers(0, n))
    seed = data.draw(st.integers(0, 2**32 - 1))
    sys, x_star = gen_gaussian_system(n, d, n_e, seed=seed, slack=0.1)
    assert residual_norm(sys, x_star) <= 1e-12
    rng = np.random.default_rng(seed)
    x = x_star + rng.standard_normal(d)
    r = residual(sys, x)
    assert np.all(r[n_e:] >= 0)
    assert (residual_norm(sys, x) == 0.0) == is_feasible(sys, x, tol=0.0)
    assert np.isclose(residual_norm(sys, x), np.linalg.norm(r))


@pytest.mark.parametrize(
    "A, b, A_out, b_out",
    [
        ([[2.0, 0.0]], [4.0], [[1.0, 0.0]], [2.0]),
        ([[1.0, 0.0]], [7.0], [[1.0, 0.0]], [7.0]),
        ([[3.0, 4.0]], [10.0], [[0.6, 0.8]], [2.0]),
    ],
)
def test_standardize_examples(A, b, A_out, b_out):
    A2, b2 = standardize(A, b)
    np.testing.assert_allclose(A2, A_out, atol=1e-15)
    np.testing.assert_allclose(b2, b_out, atol=1e-15)


def test_residual_single_inequality_row():
    sys = MixedSystem(np.array([[1.0, 0.0]]), np.array([2.0]), 0)
    assert residual(sys, [3.0, 0.0])[0] == 1.0
    assert residual(sys, [1.0, 0.0])[0] == 0.0
    eq = MixedSystem(np.array([[1.0, 0.0]]), np.array([2.0]), 1)
    assert residual_norm(eq, [5.0, 0.0]) == 3.0


def test_residual_norm_matches_row_loop(mixed_small):
    sys, _ = mixed_small
    x = np.random.default_rng(0).standard_normal(sys.d)
    total = 0.0
    for i in range(sys.n):
        r = float(np.dot(sys.A[i], x) - sys.b[i])
        if i >= sys.n_e:
            r = max(r, 0.0)
        total += r * r
    assert abs(residual_norm(sys, x) - np.sqrt(total)) < 1e-12


def test_generator_shapes_used_by_experiments():
    sys, x_star = gen_gaussian_system(500, 100, 400, seed=0)
    assert residual_norm(sys, x_star) < 1e-12
    sys, x_star = gen_gaussian_system(300, 100, 200, seed=0, slack=0.1)
    assert np.all(sys.A_ineq @ x_star - sys.b[200:] < 0)
