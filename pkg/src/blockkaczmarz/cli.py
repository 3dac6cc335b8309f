"""Command-line front end: ``blockkaczmarz {solve,pave,bound,experiment}``.

Exit codes: 0 success, 2 usage error, 3 unreadable input, 4 solver did not
converge, 5 output could not be written, 6 ``pave --obtusify --strict``
could not make every block pairwise obtuse.
"""

import argparse
import csv
import json
import os
import sys
from pathlib import Path

import numpy as np

from . import io as kio
from .errors import BadBlockCount, InvalidParams, NotConverged, ObtusifyFailed, ZeroRowError
from .experiments import export_traces, run_experiment_fig3, run_fig2_arms
from .paving import (
    check_prop1_regime,
    count_positive_pairs,
    is_pairwise_obtuse,
    measure_beta,
    obtusify,
    random_partition,
    singleton_paving,
)
from .rates import VARIANTS, RateParams, describe, epoch_comparison, rate_params, theoretical_rate
from .solvers import (
    SolverConfig,
    run_algorithm1,
    run_algorithm2,
    run_block_kaczmarz,
    run_simple,
)

EXIT_OK, EXIT_USAGE, EXIT_PARSE, EXIT_NOT_CONVERGED, EXIT_IO, EXIT_OBTUSIFY = 0, 2, 3, 4, 5, 6
ALGORITHMS = ("simple", "ll", "block", "alg1", "alg2")


class CliError(Exception):
    def __init__(self, code, message):
        super().__init__(message)
        self.code = code


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise CliError(EXIT_USAGE, message)


def _seed(value):
    if value is not None:
        return value
    env = os.environ.get("KACZMARZ_SEED")
    if env is None:
        return 0
    try:
        return int(env)
    except ValueError:
        raise CliError(EXIT_USAGE, f"KACZMARZ_SEED={env!r} is not an integer") from None


def _read(loader, path, what):
    try:
        return loader(path)
    except FileNotFoundError:
        raise CliError(EXIT_PARSE, f"{what} file not found: {path}") from None
    except (OSError, ValueError, KeyError, TypeError, ZeroRowError) as exc:
        raise CliError(EXIT_PARSE, f"cannot parse {what} file {path}: {exc}") from None


def _write(fn, *args):
    try:
        return fn(*args)
    except OSError as exc:
        raise CliError(EXIT_IO, f"cannot write output: {exc}") from None


def _emit(args, payload, lines):
    if args.json:
        print(json.dumps(payload, indent=1, sort_keys=True))
    else:
        for line in lines:
            print(line)


def _write_trace(trace, out_dir, stem):
    out_dir = Path(out_dir)
    with (out_dir / f"{stem}.csv").open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["iteration", "residual", "counted", "kind", "choice"])
        counted = trace.counted
        for k in range(len(trace)):
            w.writerow([int(trace.iteration[k]), format(trace.residual[k], ".17g"),
                        int(counted[k]), int(trace.kind[k]), int(trace.choice[k])])
    with (out_dir / f"{stem}_timing.csv").open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["iteration", "elapsed"])
        for k in range(len(trace)):
            w.writerow([int(trace.iteration[k]), format(trace.elapsed[k], ".17g")])


def cmd_solve(args):
    system = _read(kio.load_system, args.system, "system")
    T_eq = _read(kio.load_paving, args.paving, "paving") if args.paving else None
    T_in = _read(kio.load_paving, args.ineq_paving, "inequality paving") if args.ineq_paving else None
    algo = args.algorithm
    if algo == "alg2" and T_in is None:
        raise CliError(EXIT_USAGE, "alg2 requires --ineq-paving")
    if algo == "block" and system.n_i:
        raise CliError(EXIT_USAGE, "block needs an equality-only system; use alg1 or alg2")
    if algo in ("block", "alg1", "alg2") and T_eq is None:
        T_eq = singleton_paving(system.eq_rows)
    if T_eq is not None and not T_eq.covers(system.eq_rows):
        raise CliError(EXIT_USAGE, "--paving must partition the equality rows")
    if T_in is not None and not T_in.covers(system.ineq_rows):
        raise CliError(EXIT_USAGE, "--ineq-paving must partition the inequality rows")

    if args.x0 == "zero":
        x0 = np.zeros(system.d)
    elif args.x0 == "atb":
        x0 = system.A.T @ system.b
    else:
        x0 = _read(kio.load_vector, args.x0, "x0")
        if x0.shape != (system.d,):
            raise CliError(EXIT_PARSE, f"x0 has {x0.size} entries, expected {system.d}")

    try:
        cfg = SolverConfig(epsilon=args.epsilon, max_iterations=args.max_iters,
                           rule=args.rule, seed=_seed(args.seed))
    except ValueError as exc:
        raise CliError(EXIT_USAGE, str(exc)) from None
    runner = {
        "simple": lambda: run_simple(system, cfg, x0),
        "ll": lambda: run_simple(system, cfg, x0),
        "block": lambda: run_block_kaczmarz(system, T_eq, cfg, x0),
        "alg1": lambda: run_algorithm1(system, T_eq, cfg, x0),
        "alg2": lambda: run_algorithm2(system, T_eq, T_in, cfg, x0),
    }[algo]
    converged = True
    try:
        x, trace = runner()
    except NotConverged as exc:
        x, trace, converged = exc.x, exc.trace, False

    out_dir = Path(args.out_dir)
    if not out_dir.exists():
        _write(out_dir.mkdir, True, True)
    _write(kio.save_vector, x, out_dir / "solution.json")
    _write(_write_trace, trace, out_dir, "trace")
    payload = {
        "algorithm": algo,
        "converged": converged,
        "iterations": trace.iterations,
        "residual": trace.final_residual,
        "epsilon": args.epsilon,
    }
    _emit(args, payload, [
        f"algorithm   {algo}",
        f"converged   {converged}",
        f"iterations  {trace.iterations}",
        f"residual    {trace.final_residual:.6e}",
    ])
    if not converged:
        print(f"blockkaczmarz: not converged after {trace.iterations} iterations", file=sys.stderr)
        return EXIT_NOT_CONVERGED
    return EXIT_OK


def cmd_pave(args):
    system = _read(kio.load_system, args.system, "system")
    rows_kind = args.rows or ("ineq" if args.obtusify else "eq")
    if args.obtusify and rows_kind != "ineq":
        raise CliError(EXIT_USAGE, "--obtusify paves the inequality rows; use --rows ineq")
    rows = {"eq": system.eq_rows, "ineq": system.ineq_rows, "all": np.arange(system.n)}[rows_kind]
    offset = {"eq": 0, "ineq": system.n_e, "all": 0}[rows_kind]
    try:
        T = random_partition(rows.size, args.m, _seed(args.seed), offset=offset)
    except BadBlockCount as exc:
        raise CliError(EXIT_USAGE, str(exc)) from None

    out_dir = Path(args.out_dir)
    if not out_dir.exists():
        _write(out_dir.mkdir, True, True)
    report = {}
    if args.obtusify:
        try:
            system = obtusify(system, T, args.slack, max_passes=args.max_passes, strict=args.strict)
        except ObtusifyFailed as exc:
            raise CliError(EXIT_OBTUSIFY, f"obtusify failed: {exc}") from None
        _write(kio.save_system, system, out_dir / "obtusified.json")
        report["positive_pairs"] = count_positive_pairs(system.A, T)

    beta = measure_beta(system.A, T)
    flags = is_pairwise_obtuse(system.A, T)
    prop1 = check_prop1_regime(system.A[rows], T.shifted(-offset), args.delta, args.C)
    _write(kio.save_paving, T, out_dir / "paving.json")
    report.update({
        "rows": rows_kind,
        "m": T.m,
        "beta": beta,
        "block_sizes": T.sizes.tolist(),
        "pairwise_obtuse": flags,
        "all_pairwise_obtuse": all(flags),
        "prop1": prop1.to_dict(),
    })
    lines = [
        f"rows              {rows_kind}",
        f"m                 {T.m}",
        f"beta              {beta:.6f}",
        f"block sizes       {T.sizes.min()} to {T.sizes.max()}",
        f"pairwise obtuse   {sum(flags)}/{len(flags)} blocks",
        f"beta <= 1+delta   {prop1.beta_upper_ok} (delta={args.delta})",
        f"m <= C d^-2|A|^2 log(1+n)  {prop1.m_ok} (bound {prop1.m_bound:.3f}, C={args.C})",
    ]
    if "positive_pairs" in report:
        lines.append(f"positive pairs    {report['positive_pairs']}")
    _emit(args, report, lines)
    return EXIT_OK


_PARAM_FLAGS = {
    "L": "L", "n": "n", "n_i": "n_i", "beta": "beta", "m": "m", "beta_p": "beta_p",
    "m_p": "m_p", "sigma_min": "sigma_min", "frob_sq": "frob_norm_sq",
    "spec_eq_sq": "spec_norm_sq_eq",
}


def cmd_bound(args):
    if args.system:
        system = _read(kio.load_system, args.system, "system")
        T_eq = _read(kio.load_paving, args.paving, "paving") if args.paving else None
        T_in = _read(kio.load_paving, args.ineq_paving, "inequality paving") if args.ineq_paving else None
        for T in (T_eq, T_in):
            if T is not None and T.beta is None:
                measure_beta(system.A, T)
        params = rate_params(system, T_eq, T_in, L=args.L, C=args.C)
    else:
        params = RateParams(C=args.C)
    for flag, name in _PARAM_FLAGS.items():
        value = getattr(args, flag)
        if value is not None:
            setattr(params, name, value)

    variants = VARIANTS if args.variant == "all" else (args.variant,)
    factors = {}
    for v in variants:
        try:
            factors[v] = theoretical_rate(v, params)
        except InvalidParams as exc:
            if args.variant != "all":
                raise CliError(EXIT_USAGE, str(exc)) from None
    if not factors:
        raise CliError(EXIT_USAGE, "no bound is computable from the given parameters")
    payload = {"params": params.to_dict(), "factors": factors}
    lines = [f"{v:6s} {f:.10f}   {describe(v)}" for v, f in factors.items()]
    try:
        epochs = epoch_comparison(params)
    except InvalidParams:
        epochs = None
    if epochs is not None:
        payload["epoch"] = epochs
        lines += [
            f"per epoch: simple n*rho_s = {epochs['epoch_simple']:.6g}, "
            f"block (n_i+m)*rho_b = {epochs['epoch_block']:.6g}",
            f"n_i + beta m < n (block faster per iteration): {epochs['block_faster_per_iteration']}",
        ]
    _emit(args, payload, lines)
    return EXIT_OK


_EXPERIMENT_KEYS = ("trials", "seed", "jobs", "n", "d", "n_e", "m", "block_size", "slack",
                    "epochs", "epsilon", "rule")


def cmd_experiment(args):
    if args.config:
        conf = _read(lambda p: json.loads(Path(p).read_text()), args.config, "config")
        unknown = set(conf) - set(_EXPERIMENT_KEYS) - {"name", "out_dir", "format"}
        if unknown:
            raise CliError(EXIT_USAGE, f"unknown config keys: {sorted(unknown)}")
        for key, value in conf.items():
            if key != "name" and getattr(args, key, None) is None:
                setattr(args, key, value)
    seed = _seed(args.seed)
    trials = args.trials
    opts = {k: getattr(args, k) for k in ("n", "d", "n_e", "epsilon", "rule") if getattr(args, k) is not None}
    if args.name == "fig3":
        if args.m is not None:
            opts["m"] = args.m
        result = run_experiment_fig3(trials=trials or 100, seed=seed, jobs=args.jobs or 1, **opts)
    else:
        for k in ("block_size", "slack", "epochs"):
            if getattr(args, k) is not None:
                opts[k] = getattr(args, k)
        result = run_fig2_arms(trials=trials or 40, seed=seed, jobs=args.jobs or 1, **opts)

    out_dir = Path(args.out_dir)
    if not out_dir.exists():
        _write(out_dir.mkdir, True, True)
    fmt = args.format or "csv"
    written = []
    summary = {"experiment": args.name, "config": result.config, "arms": {}}
    timing = {}
    for name, arm in result.arms.items():
        path = out_dir / f"{args.name}_{name}.{fmt}"
        written.append(str(_write(export_traces, [arm.iteration, arm.epoch], path, fmt)))
        if arm.time is not None:
            tpath = out_dir / f"{args.name}_{name}_timing.{fmt}"
            written.append(str(_write(export_traces, arm.time, tpath, fmt)))
        summary["arms"][name] = {
            "iterations": [t.iterations for t in arm.traces],
            "converged": [bool(t.converged) for t in arm.traces],
            "final_residual": [t.final_residual for t in arm.traces],
            "final_median_residual": float(arm.epoch.median[-1]),
        }
        timing[name] = {
            "elapsed": [float(t.elapsed[-1]) for t in arm.traces],
            "time_to_1e-4": [t.time_to(1e-4) for t in arm.traces],
        }
    _write(Path(out_dir / f"{args.name}_summary.json").write_text, json.dumps(summary, indent=1))
    _write(Path(out_dir / f"{args.name}_timing.json").write_text, json.dumps(timing, indent=1))
    lines = [f"{args.name}: {len(result.arms)} arms, {result.config['trials']} trials"]
    for name, arm in result.arms.items():
        lines.append(f"  {name:7s} median residual after {int(arm.epoch.index[-1])} epochs: "
                     f"{arm.epoch.median[-1]:.3e}")
    lines += [f"  wrote {p}" for p in written]
    _emit(args, {"summary": summary, "files": written}, lines)
    return EXIT_OK


def build_parser():
    p = _Parser(prog="blockkaczmarz", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", parser_class=_Parser)
    sub.required = True

    def common(sp):
        sp.add_argument("--json", action="store_true", help="machine-readable output")
        sp.add_argument("--seed", type=int, default=None, help="RNG seed (fallback: $KACZMARZ_SEED, then 0)")

    s = sub.add_parser("solve", help="run a Kaczmarz method on a system file")
    s.add_argument("system", help="system file (.json or .mtx)")
    s.add_argument("--paving", help="equality paving JSON")
    s.add_argument("--ineq-paving", help="inequality paving JSON (alg2)")
    s.add_argument("--algorithm", choices=ALGORITHMS, default="alg1")
    s.add_argument("--epsilon", type=float, default=1e-6)
    s.add_argument("--max-iters", type=int, default=None)
    s.add_argument("--rule", choices=("paving", "rows"), default="paving")
    s.add_argument("--x0", default="zero", help="zero, atb, or a vector JSON file")
    s.add_argument("--out-dir", default=".")
    common(s)
    s.set_defaults(func=cmd_solve)

    s = sub.add_parser("pave", help="random row paving with beta and obtuseness report")
    s.add_argument("system")
    s.add_argument("--m", type=int, required=True)
    s.add_argument("--rows", choices=("eq", "ineq", "all"), default=None)
    s.add_argument("--obtusify", action="store_true")
    s.add_argument("--slack", type=float, default=0.0)
    s.add_argument("--max-passes", type=int, default=100)
    s.add_argument("--strict", action="store_true", help="fail if a block cannot be made obtuse")
    s.add_argument("--delta", type=float, default=0.5)
    s.add_argument("--C", type=float, default=1.0)
    s.add_argument("--out-dir", default=".")
    common(s)
    s.set_defaults(func=cmd_pave)

    s = sub.add_parser("bound", help="evaluate theoretical contraction factors")
    s.add_argument("--variant", choices=VARIANTS + ("all",), default="all")
    s.add_argument("--system", help="derive parameters from a system file")
    s.add_argument("--paving")
    s.add_argument("--ineq-paving")
    for flag in _PARAM_FLAGS:
        kind = int if flag in ("n", "n_i", "m", "m_p") else float
        s.add_argument(f"--{flag.replace('_', '-')}", dest=flag, type=kind, default=None)
    s.add_argument("--C", type=float, default=1.0)
    s.add_argument("--json", action="store_true")
    s.set_defaults(func=cmd_bound)

    s = sub.add_parser("experiment", help="reproduce the fig2 / fig3 experiments")
    s.add_argument("name", choices=("fig2", "fig3"))
    s.add_argument("--trials", type=int, default=None)
    s.add_argument("--jobs", type=int, default=None, help="worker processes (1 keeps timings clean)")
    s.add_argument("--config", help="JSON document with the same keys as the flags")
    s.add_argument("--n", type=int, default=None)
    s.add_argument("--d", type=int, default=None)
    s.add_argument("--n-e", dest="n_e", type=int, default=None)
    s.add_argument("--m", type=int, default=None)
    s.add_argument("--block-size", type=int, default=None)
    s.add_argument("--slack", type=float, default=None)
    s.add_argument("--epochs", type=int, default=None)
    s.add_argument("--epsilon", type=float, default=None)
    s.add_argument("--rule", choices=("paving", "rows"), default=None)
    s.add_argument("--format", choices=("csv", "json"), default=None)
    s.add_argument("--out-dir", default=".")
    common(s)
    s.set_defaults(func=cmd_experiment)
    return p


def main(argv=None):
    try:
        args = build_parser().parse_args(argv)
        return args.func(args)
    except CliError as exc:
        print(f"blockkaczmarz: error: {exc}", file=sys.stderr)
        return exc.code
    except ValueError as exc:
        print(f"blockkaczmarz: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
