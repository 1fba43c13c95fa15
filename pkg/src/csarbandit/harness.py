"""Experiment presets: replicated runs, CSV tables, SVG figures, pass/fail checks.

Every replication draws from its own stream ``spawn_rng(seed, *job_key)``, so
results do not depend on the number of worker processes or their schedule.
"""

from __future__ import annotations

import csv
import io
import json
import logging
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from ._validation import check_positive_int, spawn_rng
from .core import BanditInstance, gap_profile, make_instance
from .csar import CsarConfig, per_arm_phase_bound, run
from .estimators import EstimationRequest, est1, est_loo, est_random_matrix
from .exceptions import InvalidParams, NoData, NotConstructible, Singular
from .hadamard import hadamard
from .linalg import condition_number, mse, spearman
from .plotting import line_chart, scatter_chart

log = logging.getLogger(__name__)

MAX_SINGULAR_DRAWS = 1000

PRESETS = ("mse_study", "condition_study", "regret_study", "sample_scaling", "regret_tightness")

# desk-scale defaults, then what --paper-scale swaps in
DEFAULTS = {
    "mse_study": dict(n=48, k=4, reps=200, m_grid=(4, 8, 16, 32), noise="gaussian"),
    "condition_study": dict(k=4, matrices=200, inner_reps=50, m=8, noise="gaussian"),
    "regret_study": dict(n=24, ks=(2,), reps=30, horizon=200_000, c_prime=None, checkpoints=40),
    "sample_scaling": dict(n=12, k=2, delta=0.1, eps_grid=(0.4, 0.2, 0.1), reps=20, noise="bernoulli"),
    "regret_tightness": dict(
        n=16, k=4, delta=0.1, delta_plus=1.0, delta_minus=0.1, reps=30, noise="gaussian", control=True
    ),
}
PAPER_SCALE = {
    "mse_study": dict(n=144, k=8, reps=1000),
    "condition_study": dict(matrices=1000, inner_reps=100),
    "regret_study": dict(horizon=5_000_000, reps=100, ks=(2, 3, 4)),
    "sample_scaling": dict(reps=100),
    "regret_tightness": dict(reps=100),
}


@dataclass
class ExperimentConfig:
    preset: str
    seed: int = 0
    workers: int = 1
    out: str | None = None
    paper_scale: bool = False
    overrides: dict = field(default_factory=dict)

    def params(self) -> dict:
        if self.preset not in PRESETS:
            raise InvalidParams(f"unknown preset {self.preset!r}; choose from {PRESETS}")
        params = dict(DEFAULTS[self.preset])
        if self.paper_scale:
            params.update(PAPER_SCALE[self.preset])
        for key, value in self.overrides.items():
            if value is None:
                continue
            if key not in params:
                raise InvalidParams(f"preset {self.preset} has no parameter {key!r}")
            params[key] = value
        for key in ("reps", "matrices", "inner_reps"):
            if key in params:
                check_positive_int(params[key], key)
        return params


@dataclass
class PresetResult:
    preset: str
    params: dict
    tables: dict  # name -> (header, rows)
    checks: dict  # name -> bool
    figures: dict = field(default_factory=dict)  # name -> svg text
    values: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return all(self.checks.values())

    def csv_text(self, name: str) -> str:
        header, rows = self.tables[name]
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(header)
        writer.writerows([_cell(v) for v in row] for row in rows)
        return buf.getvalue()

    def write(self, out_dir: str) -> list[str]:
        os.makedirs(out_dir, exist_ok=True)
        paths = []
        for name in self.tables:
            path = os.path.join(out_dir, f"{self.preset}_{name}.csv")
            with open(path, "w", newline="") as fh:
                fh.write(self.csv_text(name))
            paths.append(path)
        for name, svg in self.figures.items():
            path = os.path.join(out_dir, f"{self.preset}_{name}.svg")
            with open(path, "w") as fh:
                fh.write(svg)
            paths.append(path)
        path = os.path.join(out_dir, f"{self.preset}_meta.json")
        with open(path, "w") as fh:
            meta = {"params": self.params, "checks": self.checks, "values": self.values}
            json.dump(meta, fh, indent=2, sort_keys=True, default=list)
            fh.write("\n")
        paths.append(path)
        return paths


def _cell(v):
    if isinstance(v, (bool, np.bool_)):
        return int(v)
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    return v


def _map(fn, jobs, workers):
    """Ordered map; results come back in job order whatever the worker count."""
    jobs = list(jobs)
    if workers <= 1 or len(jobs) <= 1:
        return [fn(job) for job in jobs]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, jobs, chunksize=max(1, len(jobs) // (4 * workers))))


# ---------------------------------------------------------------- mse study


def _mse_job(job):
    seed, rep, n, k, m_grid, noise = job
    rng = spawn_rng(seed, rep)
    inst = make_instance("uniform_gaussian", n, k, rng, noise=noise)
    arms = list(range(n))
    loo_blocks = math.ceil(n / (k + 1))
    rows = []
    for m in m_grid:
        h = est1(EstimationRequest(arms, k, 1.0, 0.5), inst, rng, m=m)
        m_loo = max(1, round(h.total_pulls / (loo_blocks * (k + 1))))
        loo = est_loo(arms, k, m_loo, inst, rng)
        rnd = est_random_matrix(arms, k, m, inst, rng)
        for method, rep_ in (("hadamard", h), ("loo", loo), ("random", rnd)):
            err = mse(rep_.vector(n), inst.means)
            rows.append((rep, m, method, rep_.m, rep_.total_pulls, err))
    return rows


def _mse_checks(means, grid):
    checks = {
        "hadamard_below_loo": all(means["hadamard", m] < means["loo", m] for m in grid),
        "hadamard_below_random": all(means["hadamard", m] < means["random", m] for m in grid),
    }
    ratios = [
        means["hadamard", a] / means["hadamard", b]
        for a, b in zip(grid, grid[1:])
        if b == 2 * a and means["hadamard", b] > 0
    ]
    if ratios:
        checks["doubling_m_halves_mse"] = all(1.5 <= r <= 3.0 for r in ratios)
    return checks, ratios


def mse_study(config: ExperimentConfig) -> PresetResult:
    p = config.params()
    n, k = p["n"], p["k"]
    jobs = [(config.seed, r, n, k, tuple(p["m_grid"]), p["noise"]) for r in range(p["reps"])]
    rows = [row for chunk in _map(_mse_job, jobs, config.workers) for row in chunk]

    summary = []
    means = {}
    for m in p["m_grid"]:
        for method in ("hadamard", "loo", "random"):
            sel = [r for r in rows if r[1] == m and r[2] == method]
            errs = np.array([r[5] for r in sel])
            pulls = float(np.mean([r[4] for r in sel]))
            means[method, m] = float(errs.mean())
            summary.append((m, method, pulls, errs.mean(), errs.std(ddof=1) if len(errs) > 1 else 0.0))

    grid = list(p["m_grid"])
    if p["noise"] == "zero":
        # noiseless: every estimator is exact, so there is nothing to rank
        checks = {"all_methods_exact": all(r[5] <= 1e-24 for r in rows)}
        ratios = []
    else:
        checks, ratios = _mse_checks(means, grid)

    series = {
        method: [(s[2], s[3]) for s in summary if s[1] == method] for method in ("hadamard", "loo", "random")
    }
    figure = line_chart(series, f"MSE vs pulls (n={n}, k={k})", "total pulls", "mean MSE", logx=True, logy=True)
    return PresetResult(
        "mse_study",
        p,
        {
            "runs": (["rep", "m", "method", "m_method", "pulls", "mse"], rows),
            "summary": (["m", "method", "mean_pulls", "mean_mse", "sd_mse"], summary),
        },
        checks,
        {"mse": figure},
        {"doubling_ratios": ratios},
    )


# ---------------------------------------------------------- condition study


def random_sign_matrix(k: int, rng) -> np.ndarray:
    """All-ones first row, then 2k - 1 random rows with k entries of each sign."""
    base = np.array([1.0] * k + [-1.0] * k)
    return np.array([np.ones(2 * k)] + [rng.permutation(base) for _ in range(2 * k - 1)])


def _condition_job(job):
    """One point of the scatter: a non-singular design and its mean MSE.

    Singular draws are skipped (and counted) until an invertible one turns up.
    """
    seed, idx, k, inner, m, noise = job
    rng = spawn_rng(seed, idx + 1)  # the control point is idx -1
    skipped = 0
    while True:
        design = hadamard(2 * k).entries.astype(float) if idx < 0 else random_sign_matrix(k, rng)
        try:
            kappa = condition_number(design)
            break
        except Singular:
            skipped += 1
            if skipped >= MAX_SINGULAR_DRAWS:
                return idx, None, None, skipped
    errs = []
    for _ in range(inner):
        inst = make_instance("uniform_gaussian", 2 * k, k, rng, noise=noise)
        report = est_random_matrix(list(range(2 * k)), k, m, inst, rng, design=design)
        errs.append(mse(report.vector(2 * k), inst.means))
    return idx, kappa, float(np.mean(errs)), skipped


def condition_study(config: ExperimentConfig) -> PresetResult:
    p = config.params()
    k = p["k"]
    try:
        hadamard(2 * k)
    except NotConstructible:
        raise InvalidParams(f"no Hadamard matrix of order {2 * k} for the control point") from None
    jobs = [(config.seed, i, k, p["inner_reps"], p["m"], p["noise"]) for i in range(-1, p["matrices"])]
    results = _map(_condition_job, jobs, config.workers)
    control = results[0]
    points = [(i, kap, err) for i, kap, err, _ in results[1:] if kap is not None]
    skipped = sum(r[3] for r in results[1:])
    if skipped:
        log.info("condition_study: skipped %d singular designs", skipped)
    if len(points) < 2:
        raise NoData("fewer than two non-singular designs to correlate")
    kappas = [kap for _, kap, _ in points]
    errs = [err for _, _, err in points]
    rho_s = spearman(kappas, errs)
    checks = {
        "spearman_at_least_0.8": rho_s >= 0.8,
        "hadamard_control_kappa_1": abs(control[1] - 1.0) <= 1e-8,
        "hadamard_control_min_mse": control[2] <= min(errs),
    }
    rows = [("random", i, kap, err) for i, kap, err in points]
    rows.insert(0, ("hadamard", -1, control[1], control[2]))
    figure = scatter_chart(
        {"random": [(kap, err) for _, kap, err in points], "hadamard": [(control[1], control[2])]},
        f"MSE vs condition number (2k={2 * k}), spearman={rho_s:.3f}",
        "condition number",
        "mean MSE",
        logx=True,
        logy=True,
    )
    return PresetResult(
        "condition_study",
        p,
        {
            "points": (["design", "index", "kappa", "mean_mse"], rows),
            "summary": (["spearman", "points", "skipped_singular"], [(rho_s, len(points), skipped)]),
        },
        checks,
        {"scatter": figure},
        {"spearman": rho_s, "skipped": skipped},
    )


# ------------------------------------------------------------- regret study


def regret_constant(k: int) -> float:
    """C' at which CSAR's exploration provably fits inside the horizon.

    Through phase t, EST1 pulls about (16/3) n 4^t log(n/delta) subsets; the
    stopping phase has 4^t <= 4 (2k/eps)^2. Together: (256/3) k^2 n/eps^2 log.
    """
    return 256.0 / 3.0 * k * k


def uniform_subset_regret(instance: BanditInstance, horizon: int, rng, checkpoints) -> np.ndarray:
    """Pseudo-regret of pulling a uniformly random k-subset every round."""
    n, k = instance.n, instance.k
    checkpoints = np.asarray(checkpoints, dtype=np.int64)
    out = np.empty(checkpoints.size)
    total, done, chunk = 0.0, 0, 50_000
    gaps_cum = np.empty(0)
    ci = 0
    while done < horizon and ci < checkpoints.size:
        size = min(chunk, horizon - done)
        picks = np.argpartition(rng.random((size, n)), k - 1, axis=1)[:, :k]
        gaps = instance.optimal_value - instance.means[picks].sum(axis=1)
        gaps_cum = total + np.cumsum(gaps)
        while ci < checkpoints.size and checkpoints[ci] <= done + size:
            c = checkpoints[ci]
            out[ci] = total if c == done else gaps_cum[c - done - 1]
            ci += 1
        total = float(gaps_cum[-1])
        done += size
    out[ci:] = total
    return out


def _checkpoints(horizon: int, count: int) -> np.ndarray:
    pts = np.unique(np.round(np.logspace(1, math.log10(horizon), count)).astype(np.int64))
    return np.unique(np.concatenate([pts, [horizon // 2, horizon]]))


def _regret_job(job):
    seed, k, rep, n, horizon, c_prime, count = job
    rng = spawn_rng(seed, k, rep)
    inst = make_instance("uniform_bernoulli", n, k, rng)
    cps = _checkpoints(horizon, count)
    config = CsarConfig(mode="horizon", horizon=horizon, c_prime=c_prime, estimator="est2")
    result = run(config, inst, rng)
    csar_curve = result.ledger.regret_at(cps)
    uniform_curve = uniform_subset_regret(inst, horizon, spawn_rng(seed, k, rep, 1), cps)
    return k, rep, cps, csar_curve, uniform_curve, result.phases


def regret_study(config: ExperimentConfig) -> PresetResult:
    p = config.params()
    n, horizon = p["n"], p["horizon"]
    ks = [int(k) for k in p["ks"]]
    jobs = []
    for k in ks:
        c_prime = p["c_prime"] if p["c_prime"] is not None else regret_constant(k)
        jobs += [(config.seed, k, r, n, horizon, c_prime, p["checkpoints"]) for r in range(p["reps"])]
    results = _map(_regret_job, jobs, config.workers)

    curves, finals, summary, checks, figures = [], [], [], {}, {}
    for k in ks:
        res = [r for r in results if r[0] == k]
        cps = res[0][2]
        csar = np.array([r[3] for r in res])
        unif = np.array([r[4] for r in res])
        for method, arr in (("csar", csar), ("uniform", unif)):
            mean, sd = arr.mean(axis=0), arr.std(axis=0, ddof=1) if len(arr) > 1 else np.zeros(len(cps))
            curves += [(k, method, int(t), mu, s) for t, mu, s in zip(cps, mean, sd)]
        for r in res:
            finals.append((k, r[1], "csar", r[3][-1], r[5]))
            finals.append((k, r[1], "uniform", r[4][-1], ""))
        wins = float(np.mean(csar[:, -1] < unif[:, -1]))
        mean_curve = csar.mean(axis=0)
        half = mean_curve[np.searchsorted(cps, horizon // 2)]
        growth = (mean_curve[-1] - half) / half if half > 0 else math.inf
        summary.append(
            (k, csar[:, -1].mean(), csar[:, -1].std(ddof=1) if len(res) > 1 else 0.0,
             unif[:, -1].mean(), unif[:, -1].std(ddof=1) if len(res) > 1 else 0.0, wins, growth)
        )
        checks[f"k{k}_csar_beats_uniform_95pct"] = wins >= 0.95
        checks[f"k{k}_csar_regret_flattens"] = growth <= 0.2
        figures[f"curve_k{k}"] = line_chart(
            {"csar": list(zip(cps, csar.mean(axis=0))), "uniform": list(zip(cps, unif.mean(axis=0)))},
            f"cumulative pseudo-regret (n={n}, k={k})",
            "t",
            "regret",
            logx=True,
        )
    return PresetResult(
        "regret_study",
        p,
        {
            "curves": (["k", "method", "t", "mean_regret", "sd_regret"], curves),
            "finals": (["k", "rep", "method", "final_regret", "phases"], finals),
            "summary": (
                ["k", "csar_mean", "csar_sd", "uniform_mean", "uniform_sd", "win_fraction", "growth_ratio"],
                summary,
            ),
        },
        checks,
        figures,
    )


# ----------------------------------------------------------- sample scaling


def _scaling_job(job):
    seed, eps, rep, n, k, delta, noise = job
    rng = spawn_rng(seed, int(round(eps * 1e6)), rep)
    inst = make_instance("bernoulli_epsilon_k", n, k, eps=eps, noise=noise)
    result = run(CsarConfig(delta=delta), inst, rng)
    accounting = result.total_pulls == result.ledger.pulls == result.estimate_pulls
    return eps, rep, result.total_pulls, result.phases, result.success, accounting


def zero_noise_phase_check(instance: BanditInstance, delta: float = 0.1) -> bool:
    """Noiseless CSAR: every arm decided no later than its per-arm phase bound."""
    noiseless = BanditInstance(instance.means, instance.k, "zero")
    result = run(CsarConfig(delta=delta), noiseless)
    gaps = gap_profile(noiseless).gaps
    return all(
        result.termination_phase[a] is not None and result.termination_phase[a] <= per_arm_phase_bound(gaps[a])
        for a in range(noiseless.n)
    )


def sample_scaling(config: ExperimentConfig) -> PresetResult:
    p = config.params()
    n, k, delta = p["n"], p["k"], p["delta"]
    grid = [float(e) for e in p["eps_grid"]]
    jobs = [(config.seed, e, r, n, k, delta, p["noise"]) for e in grid for r in range(p["reps"])]
    rows = _map(_scaling_job, jobs, config.workers)
    summary = []
    for e in grid:
        sel = [r for r in rows if r[0] == e]
        pulls = np.array([r[2] for r in sel], dtype=float)
        summary.append((e, pulls.mean(), pulls.std(ddof=1) if len(sel) > 1 else 0.0, np.mean([r[4] for r in sel])))
    slope = float(np.polyfit(np.log([1 / e for e in grid]), np.log([s[1] for s in summary]), 1)[0])
    checks = {
        "slope_in_[1.6,2.4]": 1.6 <= slope <= 2.4,
        "pull_accounting": all(r[5] for r in rows),
        "zero_noise_phase_bound": all(
            zero_noise_phase_check(make_instance("bernoulli_epsilon_k", n, k, eps=e), delta) for e in grid
        ),
    }
    return PresetResult(
        "sample_scaling",
        p,
        {
            "runs": (["eps", "rep", "total_pulls", "phases", "success", "accounting_ok"], rows),
            "summary": (["eps", "mean_pulls", "sd_pulls", "success_rate"], summary),
            "fit": (["slope"], [(slope,)]),
        },
        checks,
        {},
        {"slope": slope},
    )


# --------------------------------------------------------- regret tightness


def _tightness_job(job):
    seed, case, estimator, rep, n, k, delta, dp, dm, noise = job
    rng = spawn_rng(seed, case, rep)
    inst = make_instance("two_gap", n, k, delta_plus=dp, delta_minus=dm, noise=noise)
    result = run(CsarConfig(delta=delta, estimator=estimator), inst, rng)
    return case, estimator, rep, result.regret, result.total_pulls, result.phases, result.success


def regret_tightness(config: ExperimentConfig) -> PresetResult:
    p = config.params()
    n, k, delta = p["n"], p["k"], p["delta"]
    cases = [(0, p["delta_plus"], p["delta_minus"])]
    if p["control"]:
        cases.append((1, p["delta_minus"], p["delta_minus"]))
    jobs = [
        (config.seed, case, est, r, n, k, delta, dp, dm, p["noise"])
        for case, dp, dm in cases
        for est in ("est1", "est2")
        for r in range(p["reps"])
    ]
    rows = _map(_tightness_job, jobs, config.workers)
    summary = []
    stats = {}
    for case, dp, dm in cases:
        for est in ("est1", "est2"):
            regrets = np.array([r[3] for r in rows if r[0] == case and r[1] == est])
            sd = regrets.std(ddof=1) if len(regrets) > 1 else 0.0
            stats[case, est] = (regrets.mean(), sd)
            summary.append((case, dp, dm, est, regrets.mean(), sd))
    checks = {"est2_below_est1": bool(stats[0, "est2"][0] < stats[0, "est1"][0])}
    values = {}
    if p["control"]:
        (m1, s1), (m2, s2) = stats[1, "est1"], stats[1, "est2"]
        values["control_overlap_1sd"] = bool(abs(m1 - m2) <= s1 + s2)
    return PresetResult(
        "regret_tightness",
        p,
        {
            "runs": (["case", "estimator", "rep", "regret", "total_pulls", "phases", "success"], rows),
            "summary": (["case", "delta_plus", "delta_minus", "estimator", "mean_regret", "sd_regret"], summary),
        },
        checks,
        {},
        values,
    )


RUNNERS = {
    "mse_study": mse_study,
    "condition_study": condition_study,
    "regret_study": regret_study,
    "sample_scaling": sample_scaling,
    "regret_tightness": regret_tightness,
}


def run_preset(config: ExperimentConfig) -> PresetResult:
    if config.preset not in RUNNERS:
        raise InvalidParams(f"unknown preset {config.preset!r}; choose from {PRESETS}")
    result = RUNNERS[config.preset](config)
    result.checks = {name: bool(ok) for name, ok in result.checks.items()}
    if config.out:
        result.write(config.out)
    return result
