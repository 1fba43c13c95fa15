"""Command-line entry point.

CSV schemas
-----------
estimate          rep,method,mse,max_err,pulls
csar (runs)       rep,phase,eps_t,delta_t,n_surviving,n_accepted,pulls,cum_regret
csar (summary)    rep,success,phases,total_pulls,final_regret
mse-study         runs: rep,m,method,m_method,pulls,mse
                  summary: m,method,mean_pulls,mean_mse,sd_mse
condition-study   points: design,index,kappa,mean_mse
                  summary: spearman,points,skipped_singular
regret-study      curves: k,method,t,mean_regret,sd_regret
                  finals: k,rep,method,final_regret,phases
                  summary: k,csar_mean,csar_sd,uniform_mean,uniform_sd,win_fraction,growth_ratio
sample-scaling    runs: eps,rep,total_pulls,phases,success,accounting_ok
                  summary: eps,mean_pulls,sd_pulls,success_rate
                  fit: slope
regret-tightness  runs: case,estimator,rep,regret,total_pulls,phases,success
                  summary: case,delta_plus,delta_minus,estimator,mean_regret,sd_regret

Floats are written with ``repr`` so re-runs with the same seed are byte-identical.
Exit status: 0 ok, 2 a preset check failed, 1 error.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import os
import sys

import numpy as np

from ._validation import spawn_rng
from .core import GENERATORS, BanditInstance, make_instance
from .csar import CsarConfig, run
from .estimators import EstimationRequest, est1, est_loo, est_random_matrix, sample_count
from .exceptions import BanditError
from .hadamard import hadamard
from .harness import ExperimentConfig, run_preset
from .theory import SubsetDistribution, rho

log = logging.getLogger("csarbandit")

PRESET_COMMANDS = {
    "mse-study": "mse_study",
    "condition-study": "condition_study",
    "regret-study": "regret_study",
    "sample-scaling": "sample_scaling",
    "regret-tightness": "regret_tightness",
}
CSAR_MODES = {"exact": "exact_pac", "pac": "eps_pac", "horizon": "horizon"}


def _floats(text):
    return tuple(float(x) for x in text.split(","))


def _ints(text):
    return tuple(int(x) for x in text.split(","))


def _load_json(text: str):
    if os.path.exists(text):
        with open(text) as fh:
            return json.load(fh)
    return json.loads(text)


def parse_instance_spec(spec: str):
    """JSON file, inline JSON, or ``kind[:key=value,...]``.

    Returns ``(instance_or_None, kind, params)``; random families are redrawn
    per replication, so only fixed instances come back built.
    """
    spec = spec.strip()
    if spec.startswith("{") or os.path.exists(spec):
        return BanditInstance.from_dict(_load_json(spec)), None, {}
    kind, _, rest = spec.partition(":")
    params = {}
    for item in filter(None, rest.split(",")):
        key, sep, value = item.partition("=")
        if not sep:
            raise BanditError(f"bad instance parameter {item!r}; expected key=value")
        if key == "subset":
            params[key] = [int(x) for x in value.split(";")]
        else:
            params[key] = float(value)
    if kind not in GENERATORS:
        raise BanditError(f"unknown instance kind {kind!r}; choose from {GENERATORS}")
    return None, kind, params


def _csv(header, rows) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([repr(float(v)) if isinstance(v, (float, np.floating)) else v for v in row])
    return buf.getvalue()


def _emit(args, name: str, text: str):
    if args.out:
        os.makedirs(args.out, exist_ok=True)
        path = os.path.join(args.out, name)
        with open(path, "w", newline="") as fh:
            fh.write(text)
        log.info("wrote %s", path)
    else:
        sys.stdout.write(text)


# ------------------------------------------------------------------ commands


def cmd_estimate(args) -> int:
    rows = []
    methods = ["hadamard", "loo", "random"] if args.method == "all" else [args.method]
    for rep in range(args.reps):
        rng = spawn_rng(args.seed, rep)
        inst = make_instance("uniform_gaussian", args.n, args.k, rng, noise=args.noise)
        arms = list(range(args.n))
        m = sample_count(args.eps, args.delta, args.n)
        for method in methods:
            if method == "hadamard":
                report = est1(EstimationRequest(arms, args.k, args.eps, args.delta), inst, rng)
            elif method == "loo":
                report = est_loo(arms, args.k, m, inst, rng)
            else:
                report = est_random_matrix(arms, args.k, m, inst, rng)
            err = report.vector(args.n) - inst.means
            rows.append((rep, method, float(np.mean(err**2)), float(np.abs(err).max()), report.total_pulls))
    _emit(args, "estimate.csv", _csv(["rep", "method", "mse", "max_err", "pulls"], rows))
    return 0


def cmd_csar(args) -> int:
    fixed, kind, params = parse_instance_spec(args.instance)
    config = CsarConfig(
        mode=CSAR_MODES[args.mode], delta=args.delta, eps=args.eps, horizon=args.horizon,
        c_prime=args.cprime, estimator=args.estimator, max_phases=args.max_phases,
    )
    phase_rows, summary = [], []
    for rep in range(args.reps):
        rng = spawn_rng(args.seed, rep)
        if fixed is not None:
            inst = fixed
        else:
            inst = make_instance(kind, args.n, args.k, rng, noise=args.noise, **params)
        result = run(config, inst, rng)
        phase_rows += [
            (rep, r.phase, r.eps_t, r.delta_t, r.n_surviving, r.n_accepted, r.pulls, r.cum_regret)
            for r in result.records
        ]
        summary.append((rep, int(result.success), result.phases, result.total_pulls, result.regret))
    runs_csv = _csv(
        ["rep", "phase", "eps_t", "delta_t", "n_surviving", "n_accepted", "pulls", "cum_regret"], phase_rows
    )
    summary_csv = _csv(["rep", "success", "phases", "total_pulls", "final_regret"], summary)
    if args.out:
        _emit(args, "csar_runs.csv", runs_csv)
        _emit(args, "csar_summary.csv", summary_csv)
    else:
        sys.stdout.write(runs_csv + "\n" + summary_csv)
    return 0


def cmd_preset(args) -> int:
    preset = PRESET_COMMANDS[args.command]
    overrides = {
        key: getattr(args, key)
        for key in ("n", "k", "reps", "horizon", "noise", "m_grid", "matrices", "inner_reps", "m",
                    "ks", "c_prime", "eps_grid", "delta", "delta_plus", "delta_minus")
        if hasattr(args, key)
    }
    config = ExperimentConfig(preset, args.seed, args.workers, args.out, args.paper_scale, overrides)
    result = run_preset(config)
    if not args.out:
        sys.stdout.write(result.csv_text("summary"))
    for name, ok in result.checks.items():
        print(f"{'PASS' if ok else 'FAIL'} {preset}.{name}", file=sys.stderr)
    return 0 if result.passed else 2


def cmd_theory(args) -> int:
    if args.dist == "uniform":
        dist = SubsetDistribution.uniform(args.n, args.k)
    elif args.dist == "random":
        dist = SubsetDistribution.random(args.n, args.k, spawn_rng(args.seed, 0))
    else:
        dist = SubsetDistribution.from_dict(_load_json(args.dist))
    value = rho(dist)
    bound = dist.n / dist.k
    ok = value >= bound - 1e-8
    print(f"rho={value!r} n/k={bound!r} {'PASS' if ok else 'FAIL'}")
    return 0 if ok else 2


def cmd_hadamard(args) -> int:
    h = hadamard(args.order)
    print(h.to_text())
    if args.check:
        ok = h.is_valid()
        print(f"{'PASS' if ok else 'FAIL'}: H H^T {'==' if ok else '!='} {h.order} I", file=sys.stderr)
        return 0 if ok else 2
    return 0


# -------------------------------------------------------------------- parser


def _global_flags(parser, suppress):
    default = (lambda v: argparse.SUPPRESS) if suppress else (lambda v: v)
    parser.add_argument("--seed", type=int, default=default(0), help="root seed (u64)")
    parser.add_argument("--out", default=default(None), help="output directory (default: stdout)")
    parser.add_argument("--paper-scale", action="store_true", default=default(False))
    parser.add_argument("--workers", type=int, default=default(1), help="worker processes")
    parser.add_argument("--config", default=default(None), help="JSON file or string; keys mirror the flags")
    parser.add_argument("-v", "--verbose", action="store_true", default=default(False))


def build_parser() -> tuple[argparse.ArgumentParser, dict]:
    parser = argparse.ArgumentParser(
        prog="csarbandit",
        description="Top-k combinatorial bandits with full-bandit feedback.",
        epilog=__doc__.split("CSV schemas", 1)[1].join(["CSV schemas", ""]),
        formatter_class=argparse.RawDescriptionHelpFormatter,
    )
    _global_flags(parser, suppress=False)
    sub = parser.add_subparsers(dest="command", required=True)
    common = argparse.ArgumentParser(add_help=False)
    _global_flags(common, suppress=True)
    subs = {}

    p = sub.add_parser("estimate", parents=[common], help="one-shot arm-mean estimation")
    p.add_argument("--method", choices=["hadamard", "loo", "random", "all"], default="hadamard")
    p.add_argument("--n", type=int, default=16)
    p.add_argument("--k", type=int, default=2)
    p.add_argument("--eps", type=float, default=0.2)
    p.add_argument("--delta", type=float, default=0.1)
    p.add_argument("--noise", choices=["gaussian", "bernoulli", "zero"], default="gaussian")
    p.add_argument("--reps", type=int, default=10)
    p.set_defaults(func=cmd_estimate)
    subs["estimate"] = p

    p = sub.add_parser("csar", parents=[common], help="run CSAR")
    p.add_argument("--mode", choices=sorted(CSAR_MODES), default="exact")
    p.add_argument("--estimator", choices=["est1", "est2"], default="est1")
    p.add_argument("--n", type=int, default=8)
    p.add_argument("--k", type=int, default=2)
    p.add_argument("--delta", type=float, default=0.1)
    p.add_argument("--eps", type=float, default=None)
    p.add_argument("--horizon", type=int, default=None)
    p.add_argument("--cprime", type=float, default=1.0)
    p.add_argument("--noise", choices=["gaussian", "bernoulli", "zero"], default=None)
    p.add_argument("--max-phases", type=int, default=60)
    p.add_argument(
        "--instance", default="uniform_gaussian",
        help="JSON file, inline JSON, or generator spec such as two_gap:delta_plus=1,delta_minus=0.1",
    )
    p.add_argument("--reps", type=int, default=1)
    p.set_defaults(func=cmd_csar)
    subs["csar"] = p

    preset_flags = {
        "mse-study": [("--n", int), ("--k", int), ("--reps", int), ("--noise", str), ("--m-grid", _ints)],
        "condition-study": [("--k", int), ("--matrices", int), ("--inner-reps", int), ("--m", int),
                            ("--noise", str)],
        "regret-study": [("--n", int), ("--ks", _ints), ("--reps", int), ("--horizon", int),
                         ("--c-prime", float)],
        "sample-scaling": [("--n", int), ("--k", int), ("--reps", int), ("--delta", float),
                           ("--eps-grid", _floats), ("--noise", str)],
        "regret-tightness": [("--n", int), ("--k", int), ("--reps", int), ("--delta", float),
                             ("--delta-plus", float), ("--delta-minus", float), ("--noise", str)],
    }
    for name, flags in preset_flags.items():
        p = sub.add_parser(name, parents=[common], help=f"{name} preset (desk scale by default)")
        for flag, kind in flags:
            p.add_argument(flag, type=kind, default=None)
        p.set_defaults(func=cmd_preset)
        subs[name] = p

    p = sub.add_parser("theory-check", parents=[common], help="numeric checks of the subset-design bounds")
    p.add_argument("what", choices=["rho"])
    p.add_argument("--n", type=int, default=6)
    p.add_argument("--k", type=int, default=2)
    p.add_argument("--dist", default="uniform", help="uniform, random, or a JSON file/string")
    p.set_defaults(func=cmd_theory)
    subs["theory-check"] = p

    p = sub.add_parser("hadamard", parents=[common], help="print a normalized Hadamard matrix")
    p.add_argument("what", choices=["dump"])
    p.add_argument("--order", type=int, required=True)
    p.add_argument("--check", action="store_true", help="verify H H^T = N I; exit 2 on failure")
    p.set_defaults(func=cmd_hadamard)
    subs["hadamard"] = p
    return parser, subs


def parse_args(argv=None) -> argparse.Namespace:
    parser, subs = build_parser()
    args = parser.parse_args(argv)
    if args.config:
        overrides = _load_json(args.config)
        if not isinstance(overrides, dict):
            raise BanditError("--config must hold a JSON object")
        overrides = {key.replace("-", "_"): value for key, value in overrides.items()}
        # config values become defaults, so explicit flags still win
        parser.set_defaults(**overrides)
        subs[args.command].set_defaults(**overrides)
        args = parser.parse_args(argv)
        for key, value in vars(args).items():
            if isinstance(value, list):
                setattr(args, key, tuple(value))
    return args


def main(argv=None) -> int:
    try:
        try:
            args = parse_args(argv)
        except SystemExit as exc:  # argparse usage errors are plain errors here
            return 0 if exc.code in (0, None) else 1
        logging.basicConfig(
            level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s"
        )
        if args.workers < 1:
            raise BanditError("--workers must be >= 1")
        return args.func(args)
    except (BanditError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
