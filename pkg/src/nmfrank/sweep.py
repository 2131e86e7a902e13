"""Rank-sweep orchestration: runs the requested rank-selection methods over
one dataset with deterministic per-task seeding, and writes the report.

Per-task randomness is derived from (seed, method tag, task index), so the
result of one method never depends on which other methods were requested,
and report content is a pure function of the configuration: thread budget
only affects wall-clock.  Timings therefore go to a separate sidecar file
and the log, never into report.json.
"""

import csv
import json
import logging
import sys
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, asdict
from pathlib import Path

import numpy as np

from . import baselines, rsic
from ._backend import BACKEND_NAME
from .baselines import MethodResult
from .inits import make_init_set, run_rng, slice_init
from .masked import estimate_iteration_cost, masked_error, masked_fit
from .matrices import generate_wold_mask, load_matrix
from .solver import fit, relative_residual

log = logging.getLogger("nmfrank")

SCHEMA_VERSION = 1
NOT_AVAILABLE = "n/a"

MASKCV_STREAM_TAG = 0xCC5  # mask streams for the imputation-CV methods

ALL_METHODS = ("mci", "elbow", "cophenetic", "dispersion", "permutation",
               "ari", "kscv", "madimput")

# methods whose fits come from the shared progressive-initialization pool
_SHARED_FIT_METHODS = frozenset({"mci", "elbow", "cophenetic", "dispersion"})


@dataclass
class SweepConfig:
    input: str = ""
    fmt: str = "csv"
    header: bool = False
    k_min: int = 2
    k_max: int = 0          # 0 = min(m, n, 64)
    inits: int = 100
    scd_iters: int = 100
    mu_iters: int = 500
    algorithm: str = "scd"
    methods: tuple = ALL_METHODS
    seed: int = 123456789
    holdout_fraction: float = 0.10
    theta: float = 0.25
    theta_flat: float = 0.05
    threads: int = 1
    out_dir: str = "nmfrank-out"
    normalize_residuals: bool = False
    smooth_mci: bool = False
    cost_ceiling: float = 1e12
    permutation_repeats: int = 0  # 0 = same as inits
    cv_repeats: int = 0           # 0 = same as inits


def _resolve(config, A):
    m, n = A.shape
    k_max = config.k_max or min(m, n, 64)
    if not (2 <= config.k_min <= k_max <= min(m, n)):
        raise ValueError(
            f"need 2 <= k_min <= k_max <= min(m, n); got k_min={config.k_min}, "
            f"k_max={k_max} for a {m}x{n} matrix"
        )
    if config.inits < 2:
        raise ValueError("need at least two initializations")
    if not (0.0 < config.holdout_fraction < 1.0):
        raise ValueError("holdout fraction must be in (0, 1)")
    unknown = set(config.methods) - set(ALL_METHODS)
    if unknown:
        raise ValueError(f"unknown methods: {sorted(unknown)}")
    return k_max


def _iters(config):
    return config.scd_iters if config.algorithm == "scd" else config.mu_iters


def _projected_costs(config, m, n, k_max):
    """Projected multiplication counts per method over the whole sweep."""
    ranks = range(config.k_min, k_max + 1)
    iters = _iters(config)
    dense = sum(estimate_iteration_cost(m, n, k) for k in ranks) * iters * config.inits
    perm_repeats = config.permutation_repeats or config.inits
    cv_repeats = config.cv_repeats or config.inits
    half = n // 2
    ari = (sum(estimate_iteration_cost(m, max(half, 1), k) for k in ranks)
           * 2 * iters * config.inits)
    masked = (sum(estimate_iteration_cost(m, n, k, masked=True) for k in ranks)
              * config.scd_iters * cv_repeats)
    costs = {
        "mci": dense, "elbow": dense, "cophenetic": dense, "dispersion": dense,
        "permutation": dense * 2 * perm_repeats // config.inits,
        "ari": ari,
        "kscv": masked, "madimput": masked,
    }
    return {name: costs[name] for name in config.methods}


def _shared_fit_pass(A, init_set, config, k_max, pool, wanted):
    """Fit every (run, rank) pair once and reduce per rank.

    Returns per-rank curves: MCI, mean/median relative residual, and the
    consensus coefficients, depending on which methods want them.
    """
    ranks = list(range(config.k_min, k_max + 1))
    iters = _iters(config)
    out = {"ranks": ranks, "mci": [], "mean_residual": [], "median_residual": [],
           "cophenetic": [], "dispersion": []}
    for k in ranks:
        def one(r, k=k):
            W0, H0 = slice_init(init_set, r, k)
            return fit(A, W0, H0, config.algorithm, iters)
        fits = list(pool.map(one, range(init_set.runs)))
        res = [relative_residual(A, f) for f in fits]
        out["mean_residual"].append(float(np.mean(res)))
        out["median_residual"].append(float(np.median(res)))
        if "mci" in wanted:
            stack = rsic.build_residual_stack(A, fits, normalize=config.normalize_residuals)
            out["mci"].append(rsic.mci(stack))
        if wanted & {"cophenetic", "dispersion"}:
            C = baselines.consensus(fits)
            out["cophenetic"].append(baselines.cophenetic_coefficient(C))
            out["dispersion"].append(baselines.dispersion_coefficient(C))
        log.info("rank %d: mean relative residual %.6g", k, out["mean_residual"][-1])
    return out


def _masked_cv_samples(A, init_set, config, k_max, pool):
    """Held-out error samples per rank, shared by kscv and madimput."""
    m, n = A.shape
    repeats = config.cv_repeats or config.inits
    ranks = list(range(config.k_min, k_max + 1))
    masks = [generate_wold_mask(m, n, config.holdout_fraction,
                                run_rng(config.seed, MASKCV_STREAM_TAG, t))
             for t in range(repeats)]

    def one(task):
        t, k = task
        W0, H0 = slice_init(init_set, t % init_set.runs, k)
        f = masked_fit(A, masks[t], W0, H0, config.scd_iters)
        return masked_error(A, masks[t], f)

    tasks = [(t, k) for k in ranks for t in range(repeats)]
    errors = list(pool.map(one, tasks))
    samples = {k: [] for k in ranks}
    for (t, k), e in zip(tasks, errors):
        samples[k].append(e)
    return samples


def run_sweep(config, A=None):
    """Execute the configured sweep and return the report as a dict."""
    t_start = time.monotonic()
    if A is None:
        A = load_matrix(config.input, config.fmt, header=config.header)
    A = np.ascontiguousarray(A, dtype=np.float64)
    m, n = A.shape
    k_max = _resolve(config, A)
    ranks = list(range(config.k_min, k_max + 1))
    costs = _projected_costs(config, m, n, k_max)
    methods = {}
    timings = {}

    feasible = {name for name in config.methods if costs[name] <= config.cost_ceiling}
    for name in config.methods:
        if name not in feasible:
            log.warning("method %s skipped: projected cost %.3g exceeds ceiling %.3g",
                        name, costs[name], config.cost_ceiling)
            methods[name] = MethodResult(name, ranks, [], NOT_AVAILABLE)

    init_set = make_init_set(m, n, config.k_min, k_max, config.inits, config.seed)

    with ThreadPoolExecutor(max_workers=max(config.threads, 1)) as pool:
        shared_wanted = feasible & _SHARED_FIT_METHODS
        shared = None
        if shared_wanted:
            t0 = time.monotonic()
            shared = _shared_fit_pass(A, init_set, config, k_max, pool, shared_wanted)
            timings["shared_fits"] = time.monotonic() - t0

        if "mci" in shared_wanted:
            curve = rsic.MciCurve(ranks, shared["mci"])
            if config.smooth_mci:
                curve = rsic.smooth_curve(curve)
            eps_floor = rsic.default_eps_floor(A)
            islands = rsic.detect_islands(curve, config.theta, config.theta_flat, eps_floor)
            methods["mci"] = MethodResult("mci", ranks, list(curve.values), islands)
        if "elbow" in shared_wanted:
            methods["elbow"] = baselines.elbow_select(ranks, shared["mean_residual"])
        if "cophenetic" in shared_wanted:
            methods["cophenetic"] = baselines.select_cophenetic(ranks, shared["cophenetic"])
        if "dispersion" in shared_wanted:
            methods["dispersion"] = baselines.select_dispersion(ranks, shared["dispersion"])

        if "permutation" in feasible:
            t0 = time.monotonic()
            methods["permutation"] = baselines.permutation_select(
                A, init_set, repeats=config.permutation_repeats or config.inits,
                algorithm=config.algorithm, iterations=_iters(config), seed=config.seed)
            timings["permutation"] = time.monotonic() - t0

        if "ari" in feasible:
            t0 = time.monotonic()
            methods["ari"] = baselines.ari_split_select(
                A, init_set, algorithm=config.algorithm,
                iterations=_iters(config), seed=config.seed)
            timings["ari"] = time.monotonic() - t0

        if feasible & {"kscv", "madimput"}:
            t0 = time.monotonic()
            samples = _masked_cv_samples(A, init_set, config, k_max, pool)
            if "kscv" in feasible:
                methods["kscv"] = baselines.ks_cv_select(samples)
            if "madimput" in feasible:
                methods["madimput"] = baselines.madimput_select(samples)
            timings["masked_cv"] = time.monotonic() - t0

    timings["total"] = time.monotonic() - t_start
    report = {
        "schema_version": SCHEMA_VERSION,
        "backend": BACKEND_NAME,
        # thread budget is an execution detail with no effect on results;
        # leaving it out keeps the report a pure function of the sweep inputs
        "config": {**{k: v for k, v in asdict(config).items() if k != "threads"},
                   "k_max": k_max, "methods": list(config.methods)},
        "shape": [m, n],
        "ranks": ranks,
        "projected_costs": costs,
        "methods": {
            name: {"ranks": res.ranks, "values": res.values,
                   "selected": res.selected,
                   "projected_cost": costs[name], **res.extra}
            for name, res in sorted(methods.items())
        },
    }
    if shared is not None:
        report["mean_residual"] = shared["mean_residual"]
        report["median_residual"] = shared["median_residual"]
    if "mci" in methods and not isinstance(methods["mci"].selected, str):
        report["islands"] = methods["mci"].selected
    for name, dt in timings.items():
        log.info("timing %s: %.2fs", name, dt)
    return report, timings


def emit_report(report, out_dir, timings=None):
    """Write report.json, metrics.csv and per-method plot data.

    report.json is deterministic for a given configuration; timings go to a
    separate timings.json sidecar.
    """
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    try:
        (out / "report.json").write_text(
            json.dumps(report, indent=2, sort_keys=True) + "\n")
        if timings is not None:
            (out / "timings.json").write_text(
                json.dumps(timings, indent=2, sort_keys=True) + "\n")

        ranks = report["ranks"]
        names = sorted(report["methods"])
        with open(out / "metrics.csv", "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["rank", *names])
            for i, k in enumerate(ranks):
                row = [k]
                for name in names:
                    values = report["methods"][name]["values"]
                    row.append(repr(values[i]) if i < len(values) else "")
                writer.writerow(row)

        plotdir = out / "plotdata"
        plotdir.mkdir(exist_ok=True)
        for name in names:
            values = report["methods"][name]["values"]
            with open(plotdir / f"{name}.csv", "w", newline="") as fh:
                writer = csv.writer(fh)
                writer.writerow(["rank", "value"])
                for k, v in zip(ranks, values):
                    writer.writerow([k, repr(v)])
    except OSError as exc:
        raise OSError(f"failed writing report under {out}: {exc}") from exc
    return out / "report.json"
