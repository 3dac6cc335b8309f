"""Row pavings: partitions of row indices with a measured Gram bound.

An ``(m, beta)`` row paving of ``A`` splits the rows into ``m`` blocks
``tau`` with ``lambda_max(A_tau A_tau^T) <= beta`` for each of them.
"""

from dataclasses import dataclass, field

import numpy as np

from .errors import BadBlockCount, ObtusifyFailed
from .linalg import gram_max_eigenvalue, spectral_norm


@dataclass
class RowPaving:
    """Partition of (global) row indices into non-empty blocks.

    ``beta`` is ``None`` until :func:`measure_beta` has been run against a
    matrix.
    """

    blocks: list
    beta: float = None

    def __post_init__(self):
        self.blocks = [np.asarray(t, dtype=np.intp).ravel() for t in self.blocks]
        if any(t.size == 0 for t in self.blocks):
            raise ValueError("paving blocks must be non-empty")
        all_rows = self.indices
        if np.unique(all_rows).size != all_rows.size:
            raise ValueError("paving blocks overlap")

    @property
    def m(self):
        return len(self.blocks)

    @property
    def indices(self):
        if not self.blocks:
            return np.empty(0, dtype=np.intp)
        return np.concatenate(self.blocks)

    @property
    def sizes(self):
        return np.array([t.size for t in self.blocks], dtype=np.intp)

    def covers(self, rows):
        """True when the blocks partition exactly the index set `rows`."""
        return np.array_equal(np.sort(self.indices), np.sort(np.asarray(rows)))

    def shifted(self, offset):
        return RowPaving([t + offset for t in self.blocks], self.beta)

    def to_dict(self):
        return {
            "m": self.m,
            "beta": None if self.beta is None else float(self.beta),
            "blocks": [t.tolist() for t in self.blocks],
        }

    @classmethod
    def from_dict(cls, data):
        paving = cls(data["blocks"], data.get("beta"))
        if "m" in data and int(data["m"]) != paving.m:
            raise ValueError(f"paving declares m={data['m']} but has {paving.m} blocks")
        return paving


def singleton_paving(rows):
    """The trivial paving with one block per row."""
    return RowPaving([[i] for i in np.asarray(rows).tolist()], None)


def random_partition(n_rows, m, seed=None, offset=0):
    """Uniformly random partition of ``offset .. offset + n_rows - 1`` into `m` blocks.

    Block sizes differ by at most one and each block is sorted.
    """
    if m < 1 or m > n_rows:
        raise BadBlockCount(f"cannot split {n_rows} rows into {m} blocks")
    rng = np.random.default_rng(seed)
    perm = rng.permutation(n_rows) + offset
    return RowPaving([np.sort(t) for t in np.array_split(perm, m)])


def measure_beta(A, T):
    """Largest block Gram eigenvalue; the value is also stored on ``T.beta``."""
    A = np.asarray(A, dtype=np.float64)
    T.beta = max(gram_max_eigenvalue(A[t]) for t in T.blocks)
    return T.beta


@dataclass
class Prop1Report:
    """Diagnostic comparison of a paving with the existence bounds for pavings."""

    beta: float
    m: int
    delta: float
    C: float
    m_bound: float
    beta_upper_ok: bool
    beta_lower_ok: bool
    m_ok: bool
    extra: dict = field(default_factory=dict)

    @property
    def ok(self):
        return self.beta_upper_ok and self.m_ok

    def to_dict(self):
        return {
            "beta": self.beta,
            "m": self.m,
            "delta": self.delta,
            "C": self.C,
            "m_bound": self.m_bound,
            "beta_upper_ok": self.beta_upper_ok,
            "beta_lower_ok": self.beta_lower_ok,
            "m_ok": self.m_ok,
        }


def check_prop1_regime(A, T, delta, C=1.0):
    """Check ``beta <= 1 + delta`` and ``m <= C delta^-2 ||A||^2 log(1 + n)``.

    Purely diagnostic: `C` is an unspecified absolute constant, so the
    `m` check only means something relative to the chosen value.
    """
    if not 0 < delta < 1:
        raise ValueError("delta must lie in (0, 1)")
    if T.beta is None:
        raise ValueError("paving has no measured beta; call measure_beta first")
    A = np.asarray(A, dtype=np.float64)
    n = A.shape[0]
    m_bound = C * delta**-2 * spectral_norm(A) ** 2 * np.log1p(n)
    return Prop1Report(
        beta=float(T.beta),
        m=T.m,
        delta=delta,
        C=C,
        m_bound=float(m_bound),
        beta_upper_ok=bool(T.beta <= 1 + delta),
        beta_lower_ok=bool(T.beta >= 1 - delta),
        m_ok=bool(T.m <= m_bound),
    )


def is_pairwise_obtuse(A, T):
    """Per block: do all distinct row pairs have non-positive inner product?"""
    A = np.asarray(A, dtype=np.float64)
    flags = []
    for t in T.blocks:
        G = A[t] @ A[t].T
        np.fill_diagonal(G, 0.0)
        flags.append(bool(np.all(G <= 0.0)))
    return flags


def count_positive_pairs(A, T):
    A = np.asarray(A, dtype=np.float64)
    total = 0
    for t in T.blocks:
        G = np.triu(A[t] @ A[t].T, k=1)
        total += int(np.count_nonzero(G > 0.0))
    return total


def _sweep(A, b, block):
    """One greedy pass over `block`; negates the later row of every positive pair."""
    flips = 0
    for a, i in enumerate(block):
        for k in block[a + 1 :]:
            if A[i] @ A[k] > 0.0:
                A[k] = -A[k]
                b[k] = -b[k]
                flips += 1
    return flips


def obtusify(sys, T_ineq, slack, max_passes=100, strict=True):
    """Sign-flip inequality rows so each block of `T_ineq` is pairwise obtuse.

    Rows are swept in index order; whenever two rows of a block have a
    positive inner product, the later row and its right-hand side are
    negated. Passes repeat until one makes no flip. Finally `slack` is added
    to every inequality entry of ``b``.

    Flipping ``a_k <= b_k`` to ``-a_k <= -b_k`` turns a constraint that is
    slack by ``s`` at a point into one violated by ``s``, so `slack` must be
    at least the slack the planted point had on flipped rows for it to stay
    feasible.

    Not every block admits such a signing (three rows whose pairwise inner
    products have a positive product cannot), in which case the sweep cycles.

    Raises
    ------
    ObtusifyFailed
        When `max_passes` passes all flipped something and `strict` is set.
        The exception carries the best partially flipped system (fewest
        positive pairs after any pass), which is also what a non-strict call
        returns.
    """
    if slack < 0:
        raise ValueError("slack must be nonnegative")
    if not T_ineq.covers(sys.ineq_rows):
        raise ValueError("T_ineq must partition the inequality rows")
    A = np.array(sys.A)
    b = np.array(sys.b)
    blocks = [t.tolist() for t in T_ineq.blocks]
    settled = False
    best = (count_positive_pairs(A, T_ineq), A.copy(), b.copy())
    for _ in range(max_passes):
        if sum(_sweep(A, b, t) for t in blocks) == 0:
            settled = True
            break
        remaining = count_positive_pairs(A, T_ineq)
        if remaining < best[0]:
            best = (remaining, A.copy(), b.copy())
    if not settled:
        # a cycling sweep ends in an arbitrary state; keep the best one seen
        remaining, A, b = best
    b[sys.n_e :] += slack
    out = sys.replace(A=A, b=b)
    if not settled and strict:
        raise ObtusifyFailed(
            f"{remaining} positive pairs remain after {max_passes} passes",
            system=out,
            positive_pairs=remaining,
        )
    return out
