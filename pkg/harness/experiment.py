"""
Module Name: experiment.py
Description: Runs an ExperimentConfig: resolves the problem, compressor and hyperparameters (optionally
             from a schedule), executes the configured algorithm once per seed, and writes
             metrics_<seed>.csv, reports_<seed>.jsonl, an optional uplinks_<seed>.bin and summary.csv.
Date: 2026-10-19
"""

import csv
import math
import os
from concurrent import futures
from dataclasses import dataclass, asdict, replace, field
from typing import Optional

import numpy as np

from configs.config import METRICS_FORMAT_VERSION, THREADS, debug, logger
from configs.errors import ConfigurationError, ByteMismatchError
from configs.run_config import RunConfig
from problems.problems import objective, global_gradient
from protocols import json_protocol
from server.baselines import run_baseline, BASELINES
from server.server import run_power_ef, POWER_EF
from server.utils import MessageLedger
from stationarity.schedule import schedule_for_problem
from stationarity.stationarity import classify, fosp_fraction

METRICS_COLUMNS = ["t", "f", "grad_norm", "lambda_min", "uplink_bytes_cumulative",
                   "downlink_bytes_cumulative", "error_norm", "seed"]
SUMMARY_COLUMNS = ["seed", "algorithm", "compressor", "rounds", "final_f", "final_grad_norm",
                   "uplink_bytes", "downlink_bytes", "ledger_bytes", "bytes_to_threshold",
                   "fosp_fraction", "stopped_early"]

# opcodes of the reports JSONL
REPORT = "REPORT"
SCHEDULE = "SCHEDULE"


@dataclass(frozen=True)
class MetricsRow:
    t: int
    f: float
    grad_norm: float
    lambda_min: float           # nan between eigen strides
    uplink_bytes_cumulative: int
    downlink_bytes_cumulative: int
    error_norm: float
    seed: int

    def to_dict(self):
        return asdict(self)


@dataclass
class RunPlan:
    """Everything needed to execute one seed of a config."""
    problem: object
    noise: object
    compressor: object
    run_config: RunConfig
    x0: np.ndarray
    schedule: Optional[object] = None


@dataclass
class SeedResult:
    seed: int
    rows: list
    reports: list
    trace: object = field(repr=False)
    summary: dict
    schedule: Optional[object] = None

# -------------------------
# Planning
# -------------------------

def resolve_run(cfg, seed, x0=None):
    """Build the problem, noise, compressor and RunConfig of one seed."""
    problem = cfg.build_problem()
    noise = cfg.build_noise()
    compressor = cfg.build_compressor()
    alg = cfg.algorithm
    if x0 is None:
        x0 = np.array(alg.x0, dtype=np.float64) if alg.x0 else np.zeros(problem.d)
    x0 = np.asarray(x0, dtype=np.float64)

    schedule = None
    if alg.schedule == "none":
        run_config = RunConfig(eta=alg.eta, p=alg.p, r=alg.r, T=alg.T, compressor=compressor,
                               n=problem.n, d=problem.d, seed=seed, kappas=alg.kappas,
                               p_fcc=alg.p_fcc, p_batch=alg.p_batch)
    else:
        schedule = schedule_for_problem(alg.schedule, problem, noise, compressor, alg.epsilon, x0=x0,
                                        seed=seed, kappas=alg.kappas, delta=alg.delta, r=alg.r)
        configured = {"eta": alg.eta, "p": alg.p, "r": alg.r, "T": alg.T}
        kept = {name: value for name, value in configured.items() if name not in alg.schedule_fields}
        if "T" in alg.schedule_fields:
            kept["T"] = min(schedule.T, alg.T)
            if schedule.T > alg.T:
                logger.info(f"schedule {alg.schedule} asks for T={schedule.T}; "
                            f"running the configured cap T={alg.T}")
        run_config = replace(schedule.to_run_config(compressor, problem.n, problem.d, seed, alg.kappas),
                             p_fcc=alg.p_fcc, p_batch=alg.p_batch, **kept)
        debug(f"schedule {alg.schedule}: T={schedule.T} eta={schedule.eta:.4g} p={schedule.p} "
              f"r={schedule.r:.4g}; running T={run_config.T} eta={run_config.eta:.4g} "
              f"p={run_config.p} r={run_config.r:.4g}")
    return RunPlan(problem, noise, compressor, run_config, x0, schedule)


def run_algorithm(name, plan, stop=None, ledger=None, workers=None, keep_frames=False):
    if name == POWER_EF:
        return run_power_ef(plan.run_config, plan.problem, plan.noise, plan.x0, stop=stop,
                            ledger=ledger, workers=workers, keep_frames=keep_frames)
    if name in BASELINES:
        return run_baseline(name, plan.run_config, plan.problem, plan.noise, plan.x0, stop=stop,
                            ledger=ledger, workers=workers)
    raise ConfigurationError(f"unknown algorithm {name!r}")

# -------------------------
# Metrics
# -------------------------

def grad_norms(trace, problem):
    return np.array([np.linalg.norm(global_gradient(problem, x)) for x in trace.iterates])


def bytes_to_threshold(trace, problem, threshold, norms=None):
    """Cumulative uplink bytes when ||grad f(x_t)|| first drops to threshold; None if it never does."""
    norms = grad_norms(trace, problem) if norms is None else norms
    hits = np.flatnonzero(norms <= threshold)
    if hits.size == 0:
        return None
    cumulative = np.concatenate([[0], trace.cumulative_uplink()])
    return int(cumulative[hits[0]])


def metrics_rows(trace, problem, seed, record_stride=1, eigen_stride=10, epsilon=0.1, norms=None):
    """
    MetricsRows every record_stride-th iterate (and the last one) and a StationarityReport every
    eigen_stride-th iterate.

    Returns:
        (rows, reports) where reports is a list of (t, StationarityReport).
    """
    norms = grad_norms(trace, problem) if norms is None else norms
    uplink = np.concatenate([[0], trace.cumulative_uplink()])
    downlink = np.concatenate([[0], trace.cumulative_downlink()])
    last = len(trace.iterates) - 1
    rows, reports = [], []
    for t, x in enumerate(trace.iterates):
        lam = math.nan
        if t % eigen_stride == 0:
            report = classify(problem, x, epsilon)
            reports.append((t, report))
            lam = report.lambda_min
        if t % record_stride and t != last:
            continue
        rows.append(MetricsRow(t=t, f=objective(problem, x), grad_norm=float(norms[t]), lambda_min=lam,
                               uplink_bytes_cumulative=int(uplink[t]),
                               downlink_bytes_cumulative=int(downlink[t]),
                               error_norm=float(np.linalg.norm(trace.errors[t])), seed=seed))
    return rows, reports

# -------------------------
# Writers
# -------------------------

def write_metrics(path, rows, header=""):
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(f"# {METRICS_FORMAT_VERSION} {header}".rstrip() + "\n")
        writer = csv.DictWriter(fh, fieldnames=METRICS_COLUMNS)
        writer.writeheader()
        for row in rows:
            writer.writerow({key: repr(value) if isinstance(value, float) else value
                             for key, value in row.to_dict().items()})


def read_metrics(path):
    """Rows of a metrics CSV as dicts of floats (t and seed as ints)."""
    with open(path, "r", encoding="utf-8", newline="") as fh:
        lines = [line for line in fh if not line.startswith("#")]
    out = []
    for record in csv.DictReader(lines):
        row = {key: float(value) for key, value in record.items()}
        row["t"], row["seed"] = int(row["t"]), int(row["seed"])
        out.append(row)
    return out


def write_reports(path, seed, reports, schedule=None):
    with open(path, "w", encoding="utf-8") as fh:
        if schedule is not None:
            json_protocol.write_records(fh, SCHEDULE, [dict(schedule.to_dict(), seed=seed)])
        json_protocol.write_records(fh, REPORT, [dict(report.to_dict(), t=t, seed=seed)
                                                 for t, report in reports])


def write_summary(path, summaries):
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=SUMMARY_COLUMNS)
        writer.writeheader()
        for summary in summaries:
            writer.writerow({key: "" if summary[key] is None else summary[key] for key in SUMMARY_COLUMNS})

# -------------------------
# Runs
# -------------------------

def run_seed(cfg, seed, workers=None, write=True):
    """Execute cfg for one seed and, when write is set, persist its files under cfg.output.out_dir."""
    plan = resolve_run(cfg, seed)
    name = cfg.algorithm.name
    out = cfg.output
    ledger = MessageLedger()
    trace = run_algorithm(name, plan, ledger=ledger, workers=workers,
                          keep_frames=write and out.dump_messages)

    uplink_total = int(trace.uplink_bytes.sum())
    if ledger.total_bytes != uplink_total:
        raise ByteMismatchError(f"seed {seed}: trace counts {uplink_total} uplink bytes, "
                                f"ledger counts {ledger.total_bytes}")

    norms = grad_norms(trace, plan.problem)
    rows, reports = metrics_rows(trace, plan.problem, seed, out.record_stride, out.eigen_stride,
                                 cfg.algorithm.epsilon, norms)
    summary = {
        "seed": seed,
        "algorithm": name,
        "compressor": plan.compressor.describe(),
        "rounds": trace.rounds,
        "final_f": objective(plan.problem, trace.final),
        "final_grad_norm": float(norms[-1]),
        "uplink_bytes": uplink_total,
        "downlink_bytes": int(trace.downlink_bytes.sum()),
        "ledger_bytes": ledger.total_bytes,
        "bytes_to_threshold": bytes_to_threshold(trace, plan.problem, out.compare_threshold, norms),
        "fosp_fraction": fosp_fraction(trace, plan.problem, cfg.algorithm.epsilon),
        "stopped_early": trace.stopped_early,
    }

    if write:
        os.makedirs(out.out_dir, exist_ok=True)
        header = f"algorithm={name} compressor={plan.compressor.describe()} seed={seed}"
        write_metrics(os.path.join(out.out_dir, f"metrics_{seed}.csv"), rows, header)
        write_reports(os.path.join(out.out_dir, f"reports_{seed}.jsonl"), seed, reports, plan.schedule)
        if out.dump_messages:
            if name == POWER_EF:
                with open(os.path.join(out.out_dir, f"uplinks_{seed}.bin"), "wb") as fh:
                    fh.write(b"".join(trace.uplink_frames))
            else:
                logger.warning(f"message dumps are only recorded for {POWER_EF}, not {name}")

    logger.info(f"seed {seed}: {name} f={summary['final_f']:.6g} "
                f"|grad|={summary['final_grad_norm']:.3e} uplink={uplink_total} bytes")
    return SeedResult(seed, rows, reports, trace, summary, plan.schedule)


def run_experiment(cfg, workers=None, write=True):
    """
    Run every seed of cfg. With more than one worker, seeds run concurrently and clients inside a
    seed run sequentially; results are returned in the config's seed order either way.
    """
    cfg.validate()
    workers = THREADS if workers is None else max(1, int(workers))
    seeds = list(cfg.seeds)
    if workers > 1 and len(seeds) > 1:
        with futures.ThreadPoolExecutor(max_workers=min(workers, len(seeds))) as pool:
            results = list(pool.map(lambda s: run_seed(cfg, s, workers=1, write=write), seeds))
    else:
        results = [run_seed(cfg, s, workers=workers, write=write) for s in seeds]

    if write:
        write_summary(os.path.join(cfg.output.out_dir, "summary.csv"), [r.summary for r in results])
    return results
