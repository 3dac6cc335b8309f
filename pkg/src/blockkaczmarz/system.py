"""Mixed systems of linear equalities and inequalities.

A system is stored with its equality rows first::

    <a_i, x>  = b_i    for i in 0 .. n_e - 1
    <a_i, x> <= b_i    for i in n_e .. n - 1

and every row of ``A`` has unit Euclidean norm.
"""

from dataclasses import dataclass

import numpy as np

from .errors import ZeroRowError
from .linalg import as_matrix, as_vector

FEAS_TOL = 1e-10
_ZERO_ROW = 1e-14
_UNIT_TOL = 1e-12


def _frozen(a):
    a = np.array(a, dtype=np.float64)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class MixedSystem:
    """Standardized matrix ``A`` (n x d), right-hand side ``b`` and equality count.

    Instances are immutable; the arrays are flagged read-only so the same
    system can be shared by concurrently running trials.
    """

    A: np.ndarray
    b: np.ndarray
    n_e: int

    def __post_init__(self):
        A = _frozen(as_matrix(self.A))
        b = _frozen(as_vector(self.b, A.shape[0]))
        n_e = int(self.n_e)
        if not 0 <= n_e <= A.shape[0]:
            raise ValueError(f"n_e={n_e} outside [0, {A.shape[0]}]")
        norms = np.linalg.norm(A, axis=1)
        if np.max(np.abs(norms - 1.0)) > _UNIT_TOL:
            raise ValueError("rows of A are not unit norm; call standardize() first")
        object.__setattr__(self, "A", A)
        object.__setattr__(self, "b", b)
        object.__setattr__(self, "n_e", n_e)

    @property
    def n(self):
        return self.A.shape[0]

    @property
    def d(self):
        return self.A.shape[1]

    @property
    def n_i(self):
        return self.n - self.n_e

    @property
    def eq_rows(self):
        return np.arange(self.n_e)

    @property
    def ineq_rows(self):
        return np.arange(self.n_e, self.n)

    @property
    def A_eq(self):
        return self.A[: self.n_e]

    @property
    def A_ineq(self):
        return self.A[self.n_e :]

    def is_equality(self, i):
        return 0 <= i < self.n_e

    def replace(self, A=None, b=None):
        return MixedSystem(self.A if A is None else A, self.b if b is None else b, self.n_e)

    def __eq__(self, other):
        if not isinstance(other, MixedSystem):
            return NotImplemented
        return (
            self.n_e == other.n_e
            and self.A.shape == other.A.shape
            and np.array_equal(self.A, other.A)
            and np.array_equal(self.b, other.b)
        )

    __hash__ = None


def standardize(A, b):
    """Scale every row of ``A`` and the matching entry of ``b`` to unit row norm.

    Raises
    ------
    ZeroRowError
        If some row has norm below 1e-14.
    """
    A = as_matrix(A)
    b = as_vector(b, A.shape[0])
    norms = np.linalg.norm(A, axis=1)
    bad = np.flatnonzero(norms < _ZERO_ROW)
    if bad.size:
        raise ZeroRowError(f"row {bad[0]} has zero norm")
    return A / norms[:, None], b / norms


def from_rows(A, b, is_equality):
    """Build a standardized system from rows in arbitrary order.

    Equality rows are moved to the front (stable order). Returns the system
    and the permutation ``perm`` with ``system.A[k] ~ A[perm[k]]``.
    """
    A, b = standardize(A, b)
    mask = np.asarray(is_equality, dtype=bool)
    if mask.shape != (A.shape[0],):
        raise ValueError("is_equality must have one flag per row")
    perm = np.concatenate([np.flatnonzero(mask), np.flatnonzero(~mask)])
    return MixedSystem(A[perm], b[perm], int(mask.sum())), perm


def residual(sys, x):
    """The residual map ``e(Ax - b)``.

    Equality entries are the raw residual, inequality entries its positive part.
    """
    x = as_vector(x, sys.d)
    r = sys.A @ x - sys.b
    r[sys.n_e :] = np.maximum(r[sys.n_e :], 0.0)
    return r


def residual_norm(sys, x):
    return float(np.linalg.norm(residual(sys, x)))


def is_feasible(sys, x, tol=FEAS_TOL):
    r = sys.A @ as_vector(x, sys.d) - sys.b
    return bool(np.all(np.abs(r[: sys.n_e]) <= tol) and np.all(r[sys.n_e :] <= tol))


def gen_gaussian_system(n, d, n_e, seed=None, slack=0.0):
    """Random standardized Gaussian system with a planted feasible point.

    Entries of ``A`` and of the planted ``x_star`` are i.i.d. standard
    normal; rows are normalized, then ``b = A @ x_star`` and ``slack`` is
    added to every inequality entry of ``b``.

    Returns
    -------
    system : MixedSystem
    x_star : ndarray
    """
    if not 0 <= n_e <= n:
        raise ValueError(f"n_e={n_e} outside [0, {n}]")
    if slack < 0:
        raise ValueError("slack must be nonnegative")
    rng = np.random.default_rng(seed)
    G = rng.standard_normal((n, d))
    A = G / np.linalg.norm(G, axis=1)[:, None]
    x_star = rng.standard_normal(d)
    b = A @ x_star
    b[n_e:] += slack
    return MixedSystem(A, b, n_e), x_star
