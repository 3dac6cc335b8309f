"""Monte-Carlo reproductions of the mixed-system Kaczmarz experiments.

Two protocols are provided:

``fig3``
    500 x 100 standardized Gaussian systems, 400 equalities planted at a
    Gaussian ``x_star``; Algorithm 1 with a random 16 x 25 equality paving
    against the single-row method, both from ``x_0 = A^T b``.
``fig2``
    300 x 100 systems with 100 inequalities (planted point plus slack),
    random pavings into blocks of 10 rows; Algorithm 2 on the raw system,
    on the sign-flipped ("obtusified") system, and the single-row method.

Trials are independent given seeds derived with :class:`numpy.random.SeedSequence`.
Statistics store the residual ``||e(Ax - b)||``; exports square it.
"""

import csv
import json
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .paving import measure_beta, obtusify, random_partition, count_positive_pairs
from .solvers import SolverConfig, run_algorithm1, run_algorithm2, run_simple
from .system import gen_gaussian_system

AXES = ("iteration", "epoch", "time")
CSV_HEADER = ["index", "axis", "min", "median", "max"]
TIME_BUCKETS = 100


@dataclass
class TrialStats:
    """Median/min/max of a per-trial quantity along one axis.

    ``index`` holds iteration numbers, epoch numbers, or bucket end times
    (seconds) depending on ``axis``.
    """

    axis: str
    index: np.ndarray
    min: np.ndarray
    median: np.ndarray
    max: np.ndarray
    trials: int
    quantity: str = "residual"
    config: dict = field(default_factory=dict)

    def __len__(self):
        return self.index.size

    @classmethod
    def from_matrix(cls, axis, index, values, config=None, quantity="residual"):
        values = np.asarray(values, dtype=np.float64)
        return cls(
            axis=axis,
            index=np.asarray(index),
            min=values.min(axis=0),
            median=np.median(values, axis=0),
            max=values.max(axis=0),
            trials=values.shape[0],
            quantity=quantity,
            config=dict(config or {}),
        )

    def squared(self):
        if self.quantity != "residual":
            raise ValueError(f"cannot square {self.quantity!r}")
        return TrialStats(
            self.axis, self.index, self.min**2, self.median**2, self.max**2,
            self.trials, "residual_sq", dict(self.config),
        )


@dataclass
class ArmResult:
    """Statistics of one solver arm along every axis, plus the raw traces."""

    name: str
    iteration: TrialStats
    epoch: TrialStats
    time: TrialStats = None
    traces: list = field(default_factory=list)

    def stats(self):
        return [s for s in (self.iteration, self.epoch, self.time) if s is not None]


@dataclass
class ExperimentResult:
    name: str
    arms: dict
    config: dict

    def __getitem__(self, key):
        return self.arms[key]


def _carry_forward(rows, length=None):
    length = max(len(r) for r in rows) if length is None else length
    out = np.empty((len(rows), length))
    for k, r in enumerate(rows):
        r = np.asarray(r)[:length]
        out[k, : r.size] = r
        out[k, r.size :] = r[-1]
    return out


def aggregate_iterations(traces, config=None):
    values = _carry_forward([t.residual for t in traces])
    return TrialStats.from_matrix("iteration", np.arange(values.shape[1]), values, config)


def aggregate_epochs(traces, n_epochs=None, config=None):
    if n_epochs is None:
        # round up so a run that stops mid-epoch still shows its final value
        n_epochs = max(int(np.ceil(t.counted[-1] / t.epoch_length)) for t in traces)
    values = np.array([t.at_epochs(n_epochs) for t in traces])
    return TrialStats.from_matrix("epoch", np.arange(n_epochs + 1), values, config)


def time_grid(traces, buckets=TIME_BUCKETS):
    """Bucket end times ``T k / buckets`` (k = 1..buckets), T the longest run."""
    horizon = max(float(t.elapsed[-1]) for t in traces)
    return horizon * np.arange(1, buckets + 1) / buckets


def aggregate_time(traces, grid, config=None):
    """Residual of the last record at or before each grid time (start value before any)."""
    values = np.empty((len(traces), grid.size))
    for k, t in enumerate(traces):
        pos = np.searchsorted(t.elapsed, grid, side="right") - 1
        values[k] = t.residual[np.maximum(pos, 0)]
    return TrialStats.from_matrix("time", grid, values, config)


def _arm(name, traces, config, grid=None, n_epochs=None):
    return ArmResult(
        name=name,
        iteration=aggregate_iterations(traces, config),
        epoch=aggregate_epochs(traces, n_epochs, config),
        time=None if grid is None else aggregate_time(traces, grid, config),
        traces=list(traces),
    )


def _map(fn, jobs_args, jobs):
    if jobs and jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            return list(pool.map(fn, jobs_args))
    return [fn(a) for a in jobs_args]


def _fig3_trial(args):
    seq, cfg = args
    s_sys, s_pave, s_block, s_simple = seq.spawn(4)
    sys, _ = gen_gaussian_system(cfg["n"], cfg["d"], cfg["n_e"], s_sys, slack=0.0)
    T = random_partition(sys.n_e, cfg["m"], s_pave)
    x0 = sys.A.T @ sys.b
    common = dict(epsilon=cfg["epsilon"], rule=cfg["rule"], max_iterations=None)
    _, block = run_algorithm1(sys, T, SolverConfig(seed=s_block, **common), x0=x0, check=False)
    block.meta["beta"] = T.beta
    _, simple = run_simple(sys, SolverConfig(seed=s_simple, **common), x0=x0, check=False)
    return block, simple


def run_experiment_fig3(trials=100, seed=0, n=500, d=100, n_e=400, m=16, epsilon=1e-6,
                        rule="rows", jobs=1):
    """Algorithm 1 ("block") versus the single-row method ("simple").

    Each trial draws a fresh system and paving, runs both methods from
    ``A^T b`` until ``||e|| <= epsilon`` or 100 epochs' worth of iterations,
    and keeps the trace. ``rule="rows"`` uses the ``n_e / n`` selection
    threshold of the original protocol.

    Returns
    -------
    ExperimentResult
        Arms ``"block"`` and ``"simple"``; their time statistics share one grid.
    """
    config = dict(name="fig3", trials=trials, seed=seed, n=n, d=d, n_e=n_e, m=m,
                  epsilon=epsilon, rule=rule)
    seqs = np.random.SeedSequence(seed).spawn(trials)
    results = _map(_fig3_trial, [(s, config) for s in seqs], jobs)
    block = [r[0] for r in results]
    simple = [r[1] for r in results]
    grid = time_grid(block + simple)
    arms = {
        "block": _arm("block", block, config, grid),
        "simple": _arm("simple", simple, config, grid),
    }
    return ExperimentResult("fig3", arms, config)


FIG2_ARMS = ("block", "obtuse", "simple")


def _fig2_trial(args):
    seq, arm, cfg = args
    s_sys, s_eq, s_ineq, s_run = seq.spawn(4)
    n, d, n_e, size = cfg["n"], cfg["d"], cfg["n_e"], cfg["block_size"]
    sys, _ = gen_gaussian_system(n, d, n_e, s_sys, slack=cfg["slack"])
    T_eq = random_partition(n_e, n_e // size, s_eq)
    T_in = random_partition(n - n_e, (n - n_e) // size, s_ineq, offset=n_e)
    flips_left = None
    if arm == "obtuse":
        # flipped rows become violated by their old slack; 2x slack restores it
        sys = obtusify(sys, T_in, 2 * cfg["slack"], strict=False)
        flips_left = count_positive_pairs(sys.A, T_in)
    run_cfg = SolverConfig(epsilon=cfg["epsilon"], seed=s_run, rule=cfg["rule"],
                           epoch_budget=cfg["epochs"], max_iterations=cfg["max_iterations"])
    x0 = sys.A.T @ sys.b
    if arm == "simple":
        _, trace = run_simple(sys, run_cfg, x0=x0, check=False)
    else:
        measure_beta(sys.A, T_eq)
        measure_beta(sys.A, T_in)
        _, trace = run_algorithm2(sys, T_eq, T_in, run_cfg, x0=x0, check=False)
    trace.meta["positive_pairs"] = flips_left
    return trace


def run_experiment_fig2(trials=40, seed=0, obtuse=False, method="block", n=300, d=100,
                        n_e=200, block_size=10, slack=0.1, epochs=100, epsilon=1e-12, rule="paving",
                        jobs=1):
    """One arm of the blocked-inequalities experiment.

    ``method="block"`` runs Algorithm 2 (on the obtusified system when
    `obtuse` is set); ``method="simple"`` runs the single-row method on the
    raw system. Every arm runs a fixed budget of `epochs` counted epochs,
    or stops early once ``||e|| <= epsilon``; `epsilon` sits at rounding
    level, where steps stop moving the iterate and would no longer count
    towards the budget. Equal `seed` gives the same systems and pavings in
    every arm.
    """
    if method not in ("block", "simple"):
        raise ValueError("method must be 'block' or 'simple'")
    arm = "simple" if method == "simple" else ("obtuse" if obtuse else "block")
    epoch_len = n if arm == "simple" else n // block_size
    config = dict(name="fig2", arm=arm, trials=trials, seed=seed, n=n, d=d, n_e=n_e,
                  block_size=block_size, slack=slack, epochs=epochs, epsilon=epsilon, rule=rule,
                  max_iterations=50 * epochs * epoch_len)
    seqs = np.random.SeedSequence(seed).spawn(trials)
    traces = _map(_fig2_trial, [(s, arm, config) for s in seqs], jobs)
    return _arm(arm, traces, config, n_epochs=epochs)


def run_fig2_arms(trials=40, seed=0, jobs=1, **kwargs):
    """All three arms (non-obtuse block, obtusified block, simple) on shared systems."""
    arms = {
        "block": run_experiment_fig2(trials, seed, obtuse=False, jobs=jobs, **kwargs),
        "obtuse": run_experiment_fig2(trials, seed, obtuse=True, jobs=jobs, **kwargs),
        "simple": run_experiment_fig2(trials, seed, method="simple", jobs=jobs, **kwargs),
    }
    config = dict(arms["block"].iteration.config)
    config.pop("arm", None)
    return ExperimentResult("fig2", arms, config)


def _fmt(v):
    return format(float(v), ".17g")


def export_traces(stats, path, format=None):
    """Write statistics (squared residuals) as CSV or JSON.

    One row per index with columns ``index,axis,min,median,max``. `stats`
    is a :class:`TrialStats` or a list of them. Floats carry 17
    significant digits, so a reload reproduces them exactly.
    """
    stats = [stats] if isinstance(stats, TrialStats) else list(stats)
    if not stats or all(len(s) == 0 for s in stats):
        raise ValueError("nothing to export")
    path = Path(path)
    format = format or ("json" if path.suffix.lower() == ".json" else "csv")
    stats = [s.squared() if s.quantity == "residual" else s for s in stats]
    if format == "csv":
        with path.open("w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(CSV_HEADER)
            for s in stats:
                for k in range(len(s)):
                    idx = s.index[k]
                    idx = _fmt(idx) if s.axis == "time" else str(int(idx))
                    w.writerow([idx, s.axis, _fmt(s.min[k]), _fmt(s.median[k]), _fmt(s.max[k])])
    elif format == "json":
        doc = [
            {
                "axis": s.axis,
                "quantity": s.quantity,
                "trials": s.trials,
                "config": s.config,
                "rows": [
                    [float(s.index[k]) if s.axis == "time" else int(s.index[k]),
                     float(s.min[k]), float(s.median[k]), float(s.max[k])]
                    for k in range(len(s))
                ],
            }
            for s in stats
        ]
        path.write_text(json.dumps(doc, indent=1))
    else:
        raise ValueError(f"unknown format {format!r}")
    return path


def load_traces(path):
    """Read an export back into :class:`TrialStats` (one per axis, squared residuals)."""
    path = Path(path)
    if path.suffix.lower() == ".json":
        out = []
        for block in json.loads(path.read_text()):
            rows = np.array(block["rows"], dtype=np.float64).reshape(-1, 4)
            idx = rows[:, 0] if block["axis"] == "time" else rows[:, 0].astype(np.int64)
            out.append(TrialStats(block["axis"], idx, rows[:, 1], rows[:, 2], rows[:, 3],
                                  block["trials"], block["quantity"], block["config"]))
        return out
    groups = {}
    with path.open(newline="") as fh:
        reader = csv.reader(fh)
        if next(reader) != CSV_HEADER:
            raise ValueError(f"{path}: unexpected CSV header")
        for idx, axis, lo, med, hi in reader:
            groups.setdefault(axis, []).append((idx, float(lo), float(med), float(hi)))
    out = []
    for axis, rows in groups.items():
        idx = np.array([float(r[0]) if axis == "time" else int(r[0]) for r in rows])
        vals = np.array([r[1:] for r in rows])
        out.append(TrialStats(axis, idx, vals[:, 0], vals[:, 1], vals[:, 2], 0, "residual_sq"))
    return out
