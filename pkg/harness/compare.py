"""
Module Name: compare.py
Description: Side-by-side comparison of several configs on one problem: medians of the final metrics
             over seeds, bytes needed to reach a gradient-norm threshold, and per-seed head-to-head
             wins on that byte count.
Date: 2026-10-19
"""

import csv
import math
from dataclasses import dataclass, asdict

import numpy as np

from configs.errors import ConfigurationError, ProblemMismatchError
from harness.experiment import run_experiment

COMPARE_COLUMNS = ["label", "algorithm", "compressor", "p", "seeds", "final_f", "final_grad_norm",
                   "uplink_bytes", "bytes_to_threshold", "reached"]


@dataclass(frozen=True)
class CompareRow:
    label: str
    algorithm: str
    compressor: str
    p: int
    seeds: int
    final_f: float              # medians over seeds
    final_grad_norm: float
    uplink_bytes: float
    bytes_to_threshold: float   # inf when most seeds never reach the threshold
    reached: int                # seeds that reached the threshold

    def to_dict(self):
        return asdict(self)


@dataclass
class CompareTable:
    rows: list
    threshold: float
    seeds: list
    # per_seed[i][s]: bytes-to-threshold of config i on seed s, inf when not reached
    per_seed: list

    def wins(self, a, b):
        """Number of seeds on which config a reaches the threshold with strictly fewer bytes than b."""
        return sum(1 for x, y in zip(self.per_seed[a], self.per_seed[b]) if x < y)

    def win_fraction(self, a, b):
        return self.wins(a, b) / len(self.seeds)

    def write(self, path):
        with open(path, "w", encoding="utf-8", newline="") as fh:
            writer = csv.DictWriter(fh, fieldnames=COMPARE_COLUMNS)
            writer.writeheader()
            for row in self.rows:
                writer.writerow(row.to_dict())


def _label(cfg, compressor):
    alg = cfg.algorithm
    return f"{alg.name}/{compressor}/p={alg.p}"


def compare(cfgs, workers=None):
    """
    Run every config over the seeds of the first one and tabulate them. Configs must share the problem
    instance; nothing is written to disk.
    """
    cfgs = list(cfgs)
    if not cfgs:
        raise ConfigurationError("compare needs at least one config")
    reference = cfgs[0].problem_key()
    for cfg in cfgs[1:]:
        if cfg.problem_key() != reference:
            raise ProblemMismatchError(f"{cfg.problem_key()} differs from {reference}")

    seeds = list(cfgs[0].seeds)
    threshold = cfgs[0].output.compare_threshold
    rows, per_seed = [], []
    for cfg in cfgs:
        cfg = cfg.copy()
        cfg.seeds = list(seeds)
        cfg.output.compare_threshold = threshold
        results = run_experiment(cfg, workers=workers, write=False)
        summaries = [r.summary for r in results]
        to_threshold = [math.inf if s["bytes_to_threshold"] is None else float(s["bytes_to_threshold"])
                        for s in summaries]
        per_seed.append(to_threshold)
        compressor = summaries[0]["compressor"]
        rows.append(CompareRow(
            label=_label(cfg, compressor),
            algorithm=cfg.algorithm.name,
            compressor=compressor,
            p=cfg.algorithm.p,
            seeds=len(seeds),
            final_f=float(np.median([s["final_f"] for s in summaries])),
            final_grad_norm=float(np.median([s["final_grad_norm"] for s in summaries])),
            uplink_bytes=float(np.median([s["uplink_bytes"] for s in summaries])),
            bytes_to_threshold=float(np.median(to_threshold)),
            reached=sum(1 for b in to_threshold if math.isfinite(b))))
    return CompareTable(rows, threshold, seeds, per_seed)
