"""Randomized (block) Kaczmarz iterations for mixed systems.

Four drivers share one loop:

* :func:`run_simple`: single-row method for equalities and inequalities;
  on an equality-only system it is the plain randomized Kaczmarz method.
* :func:`run_block_kaczmarz`: uniform block sampling over a paving of an
  equality-only system.
* :func:`run_algorithm1`: blocks of equalities, single inequality rows.
* :func:`run_algorithm2`: blocks of equalities and pruned blocks of
  inequalities.

Each returns ``(x, trace)`` and raises :class:`NotConverged` (carrying both)
when the iteration cap is reached before ``||e(Ax - b)|| <= epsilon``.
"""

import time
from dataclasses import dataclass, field

import numpy as np

from .errors import NotConverged
from .linalg import as_vector, lsq_min_norm, pinv
from .paving import measure_beta

# an iteration "changes" x (and counts towards an epoch) above this step norm
CHANGE_TOL = 1e-14

# kind codes stored in ResidualTrace.kind
START, EQ_BLOCK, EQ_ROW, INEQ_ROW, INEQ_BLOCK = -1, 0, 1, 2, 3

RULES = ("paving", "rows")


@dataclass
class SolverConfig:
    """Run settings shared by all drivers.

    ``max_iterations=None`` means 100 epochs' worth of iterations for the
    chosen method. ``epoch_budget`` additionally stops a run once that many
    epochs of *counted* (iterate-changing) iterations have been performed;
    such a stop is not treated as a failure.
    """

    epsilon: float = 1e-6
    max_iterations: int = None
    rule: str = "paving"
    seed: object = None
    epoch_budget: float = None

    def __post_init__(self):
        if self.epsilon < 0:
            raise ValueError("epsilon must be nonnegative")
        if self.max_iterations is not None and self.max_iterations < 1:
            raise ValueError("max_iterations must be >= 1")
        if self.rule not in RULES:
            raise ValueError(f"rule must be one of {RULES}, got {self.rule!r}")


@dataclass
class SolverState:
    x: np.ndarray
    rng: np.random.Generator
    iteration: int = 0
    counted: int = 0


@dataclass
class ResidualTrace:
    """Per-iteration record of a run; row 0 describes the starting point."""

    method: str
    epoch_length: int
    iteration: np.ndarray
    residual: np.ndarray
    changed: np.ndarray
    elapsed: np.ndarray
    kind: np.ndarray
    choice: np.ndarray
    distance: np.ndarray = None
    converged: bool = False
    meta: dict = field(default_factory=dict)

    def __len__(self):
        return self.iteration.size

    @property
    def iterations(self):
        return int(self.iteration[-1])

    @property
    def final_residual(self):
        return float(self.residual[-1])

    @property
    def counted(self):
        """Running tally of iterations that moved the iterate."""
        return np.cumsum(self.changed)

    @property
    def epoch(self):
        """Fractional epoch reached after each record."""
        return self.counted / self.epoch_length

    def first_below(self, threshold):
        """Index of the first record with ``residual <= threshold`` (or None)."""
        hits = np.flatnonzero(self.residual <= threshold)
        return int(hits[0]) if hits.size else None

    def time_to(self, threshold):
        k = self.first_below(threshold)
        return None if k is None else float(self.elapsed[k])

    def at_epochs(self, n_epochs):
        """Residual at the end of epochs ``0..n_epochs`` (carried forward)."""
        counted = self.counted
        out = np.empty(n_epochs + 1)
        targets = np.arange(n_epochs + 1) * self.epoch_length
        pos = np.searchsorted(counted, targets, side="left")
        for e, p in enumerate(pos):
            out[e] = self.residual[min(p, len(self) - 1)]
        return out

    def selections(self):
        """(kind, choice) pairs of every iteration after the start."""
        return list(zip(self.kind[1:].tolist(), self.choice[1:].tolist()))


def simple_step(sys, x, i):
    """Project `x` onto the hyperplane ``<a_i, x> = b_i``."""
    a = sys.A[i]
    return x + ((sys.b[i] - a @ x) / (a @ a)) * a


def inequality_step(sys, x, i):
    """Project `x` onto ``<a_i, x> <= b_i``; returns `x` itself when satisfied."""
    a = sys.A[i]
    viol = a @ x - sys.b[i]
    if viol > 0.0:
        return x - (viol / (a @ a)) * a
    return x


def block_step(sys, x, tau):
    """``x + pinv(A_tau) (b_tau - A_tau x)``; one-row blocks use :func:`simple_step`."""
    tau = np.asarray(tau, dtype=np.intp).ravel()
    if tau.size == 1:
        return simple_step(sys, x, tau[0])
    A_t = sys.A[tau]
    return x + lsq_min_norm(A_t, sys.b[tau] - A_t @ x)


def violated_subset(sys, x, tau_p):
    tau_p = np.asarray(tau_p, dtype=np.intp).ravel()
    return tau_p[sys.A[tau_p] @ x - sys.b[tau_p] > 0.0]


def pruned_block_step(sys, x, tau_p):
    """Block projection restricted to the rows of `tau_p` that `x` violates.

    Returns `x` itself when no row is violated; a single violated row is
    handled by :func:`inequality_step`.
    """
    sigma = violated_subset(sys, x, tau_p)
    if sigma.size == 0:
        return x
    if sigma.size == 1:
        return inequality_step(sys, x, sigma[0])
    A_s = sys.A[sigma]
    return x + lsq_min_norm(A_s, sys.b[sigma] - A_s @ x)


class _BlockProjector:
    """Caches ``pinv(A_tau)`` for every block of a fixed equality paving."""

    def __init__(self, sys, T):
        self.sys = sys
        self.blocks = T.blocks
        self.pinvs = [None if t.size == 1 else pinv(sys.A[t]) for t in T.blocks]

    def __call__(self, x, k):
        t = self.blocks[k]
        P = self.pinvs[k]
        if P is None:
            return simple_step(self.sys, x, t[0])
        return x + P @ (self.sys.b[t] - self.sys.A[t] @ x)


def _check_paving(T, rows, what):
    if T is None or not T.covers(rows):
        raise ValueError(f"paving must partition the {what} rows")


def _selection_probability(sys, T, T_ineq, rule):
    """Probability of choosing an equality block in Algorithms 1 and 2."""
    if rule == "rows":
        return sys.n_e / sys.n
    if T.m == 0:
        return 0.0
    if T.beta is None:
        measure_beta(sys.A, T)
    weight_eq = T.beta * T.m
    if T_ineq is None:
        weight_ineq = sys.n_i
    else:
        if T_ineq.beta is None:
            measure_beta(sys.A, T_ineq)
        weight_ineq = T_ineq.beta * T_ineq.m
    return weight_eq / (weight_ineq + weight_eq)


def _norm_e(sys, x):
    r = sys.A @ x - sys.b
    np.maximum(r[sys.n_e :], 0.0, out=r[sys.n_e :])
    return float(np.sqrt(r @ r))


def _run(sys, x0, cfg, step, method, epoch_length, monitor=None, check=True, meta=None, t0=None):
    """Shared iteration loop.

    ``step(state) -> (x_new, kind, choice)`` performs one randomized update.
    `t0` is the clock reading the run's setup started at.
    """
    t0 = time.perf_counter() if t0 is None else t0
    x = np.zeros(sys.d) if x0 is None else np.array(as_vector(x0, sys.d))
    state = SolverState(x=x, rng=np.random.default_rng(cfg.seed))
    epoch_length = max(int(epoch_length), 1)
    max_iter = cfg.max_iterations if cfg.max_iterations is not None else 100 * epoch_length
    budget = None if cfg.epoch_budget is None else cfg.epoch_budget * epoch_length

    res = [_norm_e(sys, x)]
    changed = [False]
    kinds = [START]
    choices = [-1]
    dist = None if monitor is None else [monitor(x)]
    elapsed = [time.perf_counter() - t0]

    while res[-1] > cfg.epsilon and state.iteration < max_iter:
        if budget is not None and state.counted >= budget:
            break
        x_new, kind, choice = step(state)
        moved = x_new is not state.x and np.linalg.norm(x_new - state.x) > CHANGE_TOL
        state.x = x_new
        state.iteration += 1
        state.counted += moved
        res.append(_norm_e(sys, x_new))
        changed.append(moved)
        kinds.append(kind)
        choices.append(choice)
        if dist is not None:
            dist.append(monitor(x_new))
        elapsed.append(time.perf_counter() - t0)

    converged = res[-1] <= cfg.epsilon
    trace = ResidualTrace(
        method=method,
        epoch_length=epoch_length,
        iteration=np.arange(len(res)),
        residual=np.array(res),
        changed=np.array(changed, dtype=bool),
        elapsed=np.array(elapsed),
        kind=np.array(kinds, dtype=np.int8),
        choice=np.array(choices, dtype=np.intp),
        distance=None if dist is None else np.array(dist),
        converged=converged,
        meta=dict(meta or {}),
    )
    budget_spent = budget is not None and state.counted >= budget
    if check and not converged and not budget_spent:
        raise NotConverged(
            f"{method}: residual {res[-1]:.3e} > {cfg.epsilon:.3e} after {state.iteration} iterations",
            x=state.x,
            trace=trace,
        )
    return state.x, trace


def run_simple(sys, cfg=None, x0=None, rows=None, monitor=None, check=True):
    """Single-row randomized Kaczmarz for mixed systems.

    Each iteration picks a row uniformly from all ``n`` rows; equality rows
    are projected onto, inequality rows only when violated. An epoch is
    ``n`` counted iterations.

    Parameters
    ----------
    rows : sequence of int, optional
        Replay these row choices instead of sampling; the run stops when
        they are exhausted.
    monitor : callable, optional
        ``monitor(x) -> float`` recorded on ``trace.distance`` (typically
        the distance to the feasible set).
    """
    cfg = cfg or SolverConfig()
    replay = None if rows is None else iter(rows)
    n_e = sys.n_e

    def step(state):
        i = int(state.rng.integers(sys.n)) if replay is None else int(next(replay))
        if i < n_e:
            return simple_step(sys, state.x, i), EQ_ROW, i
        return inequality_step(sys, state.x, i), INEQ_ROW, i

    if replay is not None:
        cfg = _replay_config(cfg, len(rows))
    return _run(sys, x0, cfg, step, "simple", sys.n, monitor, check)


def run_block_kaczmarz(sys, T, cfg=None, x0=None, blocks=None, monitor=None, check=True):
    """Randomized block Kaczmarz on an equality-only system.

    Blocks of `T` are drawn uniformly; an epoch is ``T.m`` counted iterations.
    ``blocks`` replays a sequence of block indices.
    """
    if sys.n_i:
        raise ValueError("run_block_kaczmarz needs an equality-only system; use run_algorithm1")
    _check_paving(T, sys.eq_rows, "equality")
    cfg = cfg or SolverConfig()
    t0 = time.perf_counter()
    project = _BlockProjector(sys, T)
    replay = None if blocks is None else iter(blocks)

    def step(state):
        k = int(state.rng.integers(T.m)) if replay is None else int(next(replay))
        return project(state.x, k), EQ_BLOCK, k

    if replay is not None:
        cfg = _replay_config(cfg, len(blocks))
    return _run(sys, x0, cfg, step, "block", T.m, monitor, check, t0=t0)


def run_algorithm1(sys, T_eq, cfg=None, x0=None, monitor=None, check=True):
    """Block Kaczmarz for equalities mixed with single-row inequality updates.

    Every iteration draws ``q ~ U[0, 1]``. If ``q <= p`` a block of `T_eq`
    is drawn uniformly and projected onto; otherwise an inequality row is
    drawn uniformly and enforced if violated. With ``cfg.rule == "paving"``
    ``p = beta m / (n_i + beta m)``; with ``"rows"`` it is ``n_e / n``.
    An epoch is ``n_i + m`` counted iterations.
    """
    cfg = cfg or SolverConfig()
    t0 = time.perf_counter()
    _check_paving(T_eq, sys.eq_rows, "equality")
    p = _selection_probability(sys, T_eq, None, cfg.rule)
    project = _BlockProjector(sys, T_eq)
    m, n_e, n_i = T_eq.m, sys.n_e, sys.n_i

    def step(state):
        q = state.rng.random()
        if m and (q <= p or n_i == 0):
            k = int(state.rng.integers(m))
            return project(state.x, k), EQ_BLOCK, k
        i = n_e + int(state.rng.integers(n_i))
        return inequality_step(sys, state.x, i), INEQ_ROW, i

    meta = {"p_block": p, "m": m, "beta": T_eq.beta}
    return _run(sys, x0, cfg, step, "algorithm1", n_i + m, monitor, check, meta, t0)


def run_algorithm2(sys, T_eq, T_ineq, cfg=None, x0=None, monitor=None, check=True):
    """Block updates for both equalities and (pruned) inequalities.

    As :func:`run_algorithm1`, but the inequality branch draws a block of
    `T_ineq` uniformly and projects onto the hyperplanes of its currently
    violated rows. ``p = beta m / (beta' m' + beta m)`` under the paving
    rule. An epoch is ``m' + m`` counted iterations.
    """
    cfg = cfg or SolverConfig()
    t0 = time.perf_counter()
    _check_paving(T_eq, sys.eq_rows, "equality")
    _check_paving(T_ineq, sys.ineq_rows, "inequality")
    p = _selection_probability(sys, T_eq, T_ineq, cfg.rule)
    project = _BlockProjector(sys, T_eq)
    m, m_p = T_eq.m, T_ineq.m

    def step(state):
        q = state.rng.random()
        if m and (q <= p or m_p == 0):
            k = int(state.rng.integers(m))
            return project(state.x, k), EQ_BLOCK, k
        k = int(state.rng.integers(m_p))
        return pruned_block_step(sys, state.x, T_ineq.blocks[k]), INEQ_BLOCK, k

    meta = {"p_block": p, "m": m, "beta": T_eq.beta, "m_p": m_p, "beta_p": T_ineq.beta}
    return _run(sys, x0, cfg, step, "algorithm2", m_p + m, monitor, check, meta, t0)


def _replay_config(cfg, length):
    # a replayed run performs exactly one iteration per recorded choice
    return SolverConfig(
        epsilon=cfg.epsilon,
        max_iterations=max(length, 1),
        rule=cfg.rule,
        seed=cfg.seed,
        epoch_budget=cfg.epoch_budget,
    )
