"""Ground-truth projection onto the feasible set S of a mixed system.

:func:`project_onto_S` runs Dykstra's alternating projections over the
affine set of all equality rows and the individual inequality half-spaces.
Plain cyclic projection would only find *some* feasible point; Dykstra's
correction terms make the iterates converge to the nearest one.

Convergence of Dykstra is linear at best and can crawl when S is a thin
wedge, so the run is periodically polished: the constraints active at the
current iterate are guessed and the point is projected exactly onto their
intersection; if that fails, the projection is solved by a primal
active-set method started from a feasible point of a linear program. A candidate is accepted only if it
passes the KKT test (feasible, with nonnegative multipliers on the active
inequalities), so a polished point is the exact projection up to rounding.
"""

from dataclasses import dataclass

import numpy as np
import scipy.optimize

from .errors import OracleNotConverged
from .linalg import as_vector, pinv
from .system import residual_norm

DEFAULT_TOL = 1e-10
DEFAULT_MAX_SWEEPS = 10000
_ACTIVE_TOL = 1e-7
_KKT_TOL = 1e-11


@dataclass
class ProjectionResult:
    point: np.ndarray
    distance: float
    iterations_used: int
    converged: bool
    certified: bool = False


def _certify(sys, x, q):
    """KKT test: is `q` the projection of `x` onto S (up to rounding)?"""
    A, b, n_e = sys.A, sys.b, sys.n_e
    scale = 1.0 + np.linalg.norm(x) + np.linalg.norm(b, np.inf)
    r = A @ q - b
    if np.any(np.abs(r[:n_e]) > _KKT_TOL * scale) or np.any(r[n_e:] > _KKT_TOL * scale):
        return False
    W = np.concatenate([np.arange(n_e), n_e + np.flatnonzero(r[n_e:] >= -_ACTIVE_TOL * scale)])
    if W.size == 0:
        return np.linalg.norm(x - q) <= _KKT_TOL * scale
    # multipliers need not be unique when the active rows are dependent, so
    # look for a sign-feasible set directly
    lower = np.where(W < n_e, -np.inf, 0.0)
    fit = scipy.optimize.lsq_linear(A[W].T, x - q, bounds=(lower, np.inf), method="bvls")
    return np.linalg.norm(A[W].T @ fit.x - (x - q)) <= 1e-9 * scale


def _face_projection(sys, x, p, eq_pinv):
    """Project `x` onto the face of constraints active (or violated) at `p`."""
    A, b, n_e = sys.A, sys.b, sys.n_e
    W = np.concatenate([np.arange(n_e), n_e + np.flatnonzero(A[n_e:] @ p - b[n_e:] >= -_ACTIVE_TOL)])
    if W.size == 0:
        return np.array(x)
    P = eq_pinv if W.size == n_e else pinv(A[W])
    return x + P @ (b[W] - A[W] @ x)


def _feasible_point(sys):
    """Some point of S, from a zero-objective linear program."""
    A, b, n_e = sys.A, sys.b, sys.n_e
    res = scipy.optimize.linprog(
        np.zeros(sys.d),
        A_ub=A[n_e:] if sys.n_i else None,
        b_ub=b[n_e:] if sys.n_i else None,
        A_eq=A[:n_e] if n_e else None,
        b_eq=b[:n_e] if n_e else None,
        bounds=(None, None),
        method="highs",
        options={"primal_feasibility_tolerance": 1e-10},
    )
    return res.x if res.status == 0 else None


def _active_set(sys, x, max_iter=None):
    """Exact projection by a primal active-set method from a feasible start.

    The working set holds the equalities and a linearly independent set of
    inequalities; each step minimizes ``|y - x|`` on the face of the working
    set, stopping at the first blocking inequality, and inequalities with
    negative multipliers are released.
    """
    A, b, n_e = sys.A, sys.b, sys.n_e
    y = _feasible_point(sys)
    if y is None:
        return None
    max_iter = max_iter or 10 * sys.n + 10
    scale = 1.0 + np.linalg.norm(x) + np.linalg.norm(b, np.inf)
    W = []
    for i in range(sys.n):
        if i < n_e or A[i] @ y - b[i] >= -_ACTIVE_TOL * scale:
            if np.linalg.matrix_rank(A[W + [i]], tol=1e-10) == len(W) + 1:
                W.append(i)
    for _ in range(max_iter):
        g = x - y
        if W:
            P = pinv(A[W])
            step = g - P @ (A[W] @ g)
        else:
            step = g
        # a full working set pins y; otherwise rounding leaves a tiny step
        if len(W) == sys.d or np.linalg.norm(step) <= 1e-10 * scale:
            if not W:
                return y
            lam = P.T @ g
            ineq = [k for k, i in enumerate(W) if i >= n_e]
            if not ineq or min(lam[k] for k in ineq) >= -_KKT_TOL * scale:
                return y
            W.pop(min(ineq, key=lambda k: lam[k]))
            continue
        alpha, block = 1.0, None
        for i in range(n_e, sys.n):
            if i in W:
                continue
            rate = A[i] @ step
            if rate > 1e-15:
                t = max(b[i] - A[i] @ y, 0.0) / rate
                if t < alpha:
                    alpha, block = t, i
        y = y + alpha * step
        if block is not None:
            W.append(block)
    return None


def _kkt_polish(sys, x, p, eq_pinv):
    """Exact projection of `x` onto S, if one of the candidates passes KKT.

    Tries the face guessed from the iterate `p` first, then the
    active-set solve.
    """
    q = _face_projection(sys, x, p, eq_pinv)
    if _certify(sys, x, q):
        return q
    q = _active_set(sys, x)
    if q is None:
        return None
    if _certify(sys, x, q):
        return q
    # clean up rounding in the active-set point on its own active face
    q = _face_projection(sys, x, q, eq_pinv)
    return q if _certify(sys, x, q) else None


def project_onto_S(sys, x, tol=DEFAULT_TOL, max_sweeps=DEFAULT_MAX_SWEEPS, polish_every=20, check=True):
    """Euclidean projection of `x` onto ``S = {A_eq y = b_eq, A_ineq y <= b_ineq}``.

    The caller guarantees that S is non-empty.

    Parameters
    ----------
    tol : float
        Dykstra stops once a full sweep moves the iterate by at most `tol`
        and the iterate is feasible within `tol`.
    max_sweeps : int
        Sweep cap; reaching it raises :class:`OracleNotConverged` unless
        `check` is false.
    polish_every : int
        Attempt the KKT polish every this many sweeps (0 disables it).
    """
    x = np.array(as_vector(x, sys.d))
    A, b, n_e, n = sys.A, sys.b, sys.n_e, sys.n

    if residual_norm(sys, x) == 0.0:
        return ProjectionResult(x, 0.0, 0, True, True)

    eq_pinv = pinv(sys.A_eq) if n_e else None
    A_eq, b_eq = A[:n_e], b[:n_e]
    rows = [(i, A[i], b[i]) for i in range(n_e, n)]
    corr = np.zeros((n - n_e, sys.d))

    y = np.array(x)
    sweeps = 0
    converged = False
    certified = False
    while sweeps < max_sweeps:
        start = y.copy()
        if n_e:
            y = y + eq_pinv @ (b_eq - A_eq @ y)
        for k, (_, a, bi) in enumerate(rows):
            z = y + corr[k]
            viol = a @ z - bi
            if viol > 0.0:
                new = z - viol * a
            else:
                new = z
            corr[k] = z - new
            y = new
        sweeps += 1
        if polish_every and sweeps % polish_every == 0:
            q = _kkt_polish(sys, x, y, eq_pinv)
            if q is not None:
                y, converged, certified = q, True, True
                break
        if np.linalg.norm(y - start) <= tol and residual_norm(sys, y) <= tol:
            converged = True
            q = _kkt_polish(sys, x, y, eq_pinv)
            if q is not None:
                y, certified = q, True
            break

    result = ProjectionResult(y, float(np.linalg.norm(x - y)), sweeps, converged, certified)
    if check and not converged:
        raise OracleNotConverged(f"Dykstra did not settle in {max_sweeps} sweeps", result)
    return result


def distance_to_S(sys, x, tol=DEFAULT_TOL, max_sweeps=DEFAULT_MAX_SWEEPS):
    """``d(x, S)`` through :func:`project_onto_S`."""
    return project_onto_S(sys, x, tol, max_sweeps).distance


def hoffman_lower_bound(sys, samples, seed=None, radius=1.0, anchor=None, tol=DEFAULT_TOL):
    """Empirical lower bound on the Hoffman constant of `sys`.

    Takes the largest ratio ``d(x, S) / ||e(Ax - b)||`` over `samples`
    Gaussian points ``anchor + radius * g``. `anchor` defaults to the
    projection of the origin onto S. Points with residual below 1e-8 are
    skipped. Returns 0.0 when nothing was sampled.
    """
    if samples <= 0:
        return 0.0
    rng = np.random.default_rng(seed)
    if anchor is None:
        anchor = project_onto_S(sys, np.zeros(sys.d), tol).point
    best = 0.0
    for _ in range(samples):
        x = anchor + radius * rng.standard_normal(sys.d)
        r = residual_norm(sys, x)
        if r < 1e-8:
            continue
        best = max(best, distance_to_S(sys, x, tol) / r)
    return best
