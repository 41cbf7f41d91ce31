"""
Module Name: saddle.py
Description: Saddle-escape trials on the quartic saddle. Each seed starts at the origin plus an offset
             and counts as escaped at the first round t with f(x_t) <= f(0) - delta.
Date: 2026-10-19
"""

import math
from dataclasses import dataclass

import numpy as np

from configs.errors import ConfigurationError
from harness.experiment import resolve_run, run_algorithm
from problems.problems import objective, SADDLE_QUARTIC
from configs.config import logger


@dataclass(frozen=True)
class EscapeStats:
    seeds: list
    times: list                 # first escape round per seed, None on timeout
    T: int
    delta: float

    @property
    def escaped(self):
        return [t is not None for t in self.times]

    @property
    def fraction(self):
        return sum(self.escaped) / len(self.times)

    @property
    def median_time(self):
        reached = [t for t in self.times if t is not None]
        return float(np.median(reached)) if reached else math.nan

    def to_dict(self):
        return {"seeds": list(self.seeds), "times": list(self.times), "T": self.T, "delta": self.delta,
                "fraction": self.fraction, "median_time": self.median_time}


def _start_point(d, saddle_offset):
    offset = np.asarray(saddle_offset, dtype=np.float64)
    if offset.ndim == 0:
        # scalar offsets move along the negative-curvature axis e_1
        x0 = np.zeros(d)
        x0[0] = float(offset)
        return x0
    if offset.shape != (d,):
        raise ConfigurationError(f"offset must be a scalar or a vector of length {d}")
    return offset.copy()


def saddle_escape_trial(cfg, saddle_offset=0.0, seeds=None, workers=None):
    if cfg.problem.family != SADDLE_QUARTIC:
        raise ConfigurationError(f"saddle trials need the {SADDLE_QUARTIC} family")
    seeds = list(cfg.seeds if seeds is None else seeds)
    delta = cfg.output.escape_delta
    times, horizon = [], 0

    for seed in seeds:
        x0 = _start_point(cfg.problem.d, saddle_offset)
        plan = resolve_run(cfg, seed, x0=x0)
        threshold = objective(plan.problem, np.zeros(plan.problem.d)) - delta
        horizon = plan.run_config.T
        if objective(plan.problem, x0) <= threshold:
            times.append(0)
            continue
        hit = []

        def stop(t, x):
            if objective(plan.problem, x) <= threshold:
                hit.append(t)
                return True
            return False

        run_algorithm(cfg.algorithm.name, plan, stop=stop, workers=workers)
        times.append(hit[0] if hit else None)

    stats = EscapeStats(seeds, times, horizon, delta)
    logger.info(f"saddle trial: escaped {sum(stats.escaped)}/{len(seeds)} seeds, "
                f"median time {stats.median_time}")
    return stats
