"""
Module Name: stationarity.py
Description: First- and second-order stationarity of iterates. A point is an eps-FOSP when
             ||grad f(x)|| <= eps; an eps-FOSP is an eps-SOSP when lambda_min(grad^2 f(x)) >= -sqrt(rho eps)
             and a strict saddle otherwise.
Date: 2026-10-19
"""

import math
from dataclasses import dataclass, asdict

import numpy as np

from configs.config import LANCZOS_MAX_ITERS, LANCZOS_TOL
from configs.errors import ConfigurationError
from problems.problems import HvpOracle, global_gradient
from stationarity.eigen import min_eigenvalue

NOT_FOSP = "NotFOSP"
STRICT_SADDLE = "StrictSaddle"
SOSP = "SOSP"


@dataclass(frozen=True)
class StationarityReport:
    grad_norm: float
    lambda_min: float
    classification: str
    epsilon: float
    rho: float

    @property
    def saddle_threshold(self):
        return -math.sqrt(self.rho * self.epsilon)

    def to_dict(self):
        record = asdict(self)
        record["saddle_threshold"] = self.saddle_threshold
        return record


def classify_values(grad_norm, lambda_min, epsilon, rho):
    if grad_norm > epsilon:
        return NOT_FOSP
    if lambda_min < -math.sqrt(rho * epsilon):
        return STRICT_SADDLE
    return SOSP


def classify(problem, x, epsilon, rho_used=None, iters=LANCZOS_MAX_ITERS, tol=LANCZOS_TOL):
    """
    Classify x using the exact global gradient and the smallest Hessian eigenvalue.
    rho_used defaults to the problem's Hessian-Lipschitz constant.
    """
    if not epsilon > 0:
        raise ConfigurationError(f"epsilon must be positive, got {epsilon}")
    rho = problem.rho if rho_used is None else rho_used
    x = np.asarray(x, dtype=np.float64)
    grad_norm = float(np.linalg.norm(global_gradient(problem, x)))
    lam = min_eigenvalue(HvpOracle(problem, x), problem.d, iters, tol)
    return StationarityReport(grad_norm, lam, classify_values(grad_norm, lam, epsilon, rho),
                              float(epsilon), float(rho))


def fosp_fraction(trace, problem, epsilon):
    """Fraction of recorded iterates x_0 .. x_T with ||grad f(x_t)|| <= epsilon."""
    iterates = trace.iterates
    if len(iterates) == 0:
        raise ConfigurationError("trace holds no iterates")
    hits = sum(1 for x in iterates if np.linalg.norm(global_gradient(problem, x)) <= epsilon)
    return hits / len(iterates)
