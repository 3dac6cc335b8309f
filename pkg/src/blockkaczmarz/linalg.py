"""Dense real matrix kernels.

Everything here is a pure function of float64 numpy arrays. Singular
values at or below ``RCOND * sigma_max`` are treated as exact zeros, which
makes the minimum-norm solves well defined on rank-deficient blocks.
"""

import numpy as np

RCOND = 1e-12


def as_matrix(A):
    """Return `A` as a finite, non-empty 2-D float64 array."""
    A = np.asarray(A, dtype=np.float64)
    if A.ndim != 2 or A.shape[0] < 1 or A.shape[1] < 1:
        raise ValueError(f"expected a non-empty 2-D matrix, got shape {A.shape}")
    if not np.all(np.isfinite(A)):
        raise ValueError("matrix has non-finite entries")
    return A


def as_vector(v, length=None):
    v = np.asarray(v, dtype=np.float64)
    if v.ndim != 1:
        raise ValueError(f"expected a 1-D vector, got shape {v.shape}")
    if length is not None and v.shape[0] != length:
        raise ValueError(f"expected length {length}, got {v.shape[0]}")
    if not np.all(np.isfinite(v)):
        raise ValueError("vector has non-finite entries")
    return v


def row_norms(A):
    """Euclidean norm of every row of `A`."""
    return np.linalg.norm(as_matrix(A), axis=1)


def singular_values(A):
    return np.linalg.svd(as_matrix(A), compute_uv=False)


def min_singular_value(A):
    """Smallest singular value ``sigma_d(A)`` of an ``n x d`` matrix.

    For a wide matrix (``n < d``) the trailing singular values are zero by
    convention, so 0.0 is returned.
    """
    A = as_matrix(A)
    if A.shape[0] < A.shape[1]:
        return 0.0
    return float(singular_values(A)[-1])


def spectral_norm(A):
    """Largest singular value of `A`."""
    return float(singular_values(A)[0])


def gram_max_eigenvalue(A_sub):
    """``lambda_max(A_sub @ A_sub.T)``, i.e. the squared spectral norm."""
    return spectral_norm(A_sub) ** 2


def pinv(A, rcond=RCOND):
    """Moore-Penrose pseudoinverse through a thin SVD with a relative cutoff."""
    A = as_matrix(A)
    U, s, Vt = np.linalg.svd(A, full_matrices=False)
    keep = s > rcond * s[0] if s[0] > 0 else np.zeros_like(s, dtype=bool)
    inv_s = np.zeros_like(s)
    inv_s[keep] = 1.0 / s[keep]
    return (Vt.T * inv_s) @ U.T


def lsq_min_norm(A_sub, r, rcond=RCOND):
    """Minimum-norm minimizer of ``||A_sub z - r||``, i.e. ``pinv(A_sub) @ r``.

    Parameters
    ----------
    A_sub : (k, d) array_like
        Row block; may be rank deficient.
    r : (k,) array_like
        Right-hand side.

    Returns
    -------
    z : (d,) ndarray
    """
    A_sub = as_matrix(A_sub)
    r = as_vector(r, A_sub.shape[0])
    U, s, Vt = np.linalg.svd(A_sub, full_matrices=False)
    if s[0] == 0:
        return np.zeros(A_sub.shape[1])
    keep = s > rcond * s[0]
    coef = (U[:, keep].T @ r) / s[keep]
    return Vt[keep].T @ coef
