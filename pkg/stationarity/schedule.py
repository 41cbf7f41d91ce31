"""
Module Name: schedule.py
Description: Parameter schedules (T, eta, p, r) from the first- and second-order convergence
             guarantees. The kappa multipliers are unspecified by the theory and default to 1, so the
             schedules are advisory. Logarithms are natural.
Date: 2026-10-19
"""

import math
from dataclasses import dataclass, asdict
from typing import Optional

import numpy as np

from configs.config import FAILURE_BUDGET, logger
from configs.errors import ConfigurationError
from configs.run_config import Kappas, RunConfig
from problems.oracle import stochastic_gradient
from problems.problems import objective
from problems.streams import substream, PHI_ESTIMATE
from server.server import sample_perturbation

FIRST = "first"
SECOND = "second"


@dataclass(frozen=True)
class ScheduleInputs:
    epsilon: float
    mu: float
    n: int
    d: int
    sigma: float
    L: float
    phi: float
    f_gap: float                # f(x_0) - f_min
    rho: float = 0.0
    f_max: float = math.inf
    r: float = 0.0              # used by the first-order schedule only
    iota: float = math.log(1.0 / FAILURE_BUDGET)
    kappas: Kappas = Kappas()
    L_tilde: float = 0.0


@dataclass(frozen=True)
class ParamSchedule:
    order: str
    T: int
    eta: float
    p: int
    r: float
    chi_sq: float
    phi: float
    iota: float
    p_formula: float
    p_floor: int
    p_clamped: bool
    L_tilde: float = 0.0
    # iota / (eta sqrt(rho eps)); informational, second order only
    script_i: Optional[float] = None

    def to_dict(self):
        return asdict(self)

    def to_run_config(self, compressor, n, d, seed=0, kappas=None):
        return RunConfig(eta=self.eta, p=self.p, r=self.r, T=self.T, compressor=compressor, n=n, d=d,
                         seed=seed, kappas=kappas or Kappas())


def p_lower_bound(mu):
    """ceil(log(mu^2 / 144) / log(1 - mu)); 1 for a lossless compressor."""
    if mu >= 1.0:
        return 1
    return max(1, math.ceil(math.log(mu ** 2 / 144.0) / math.log(1.0 - mu)))


def _check_inputs(order, inputs):
    if order not in (FIRST, SECOND):
        raise ConfigurationError(f"unknown schedule order {order!r}")
    if not 0 < inputs.epsilon <= 1:
        raise ConfigurationError(f"epsilon must lie in (0, 1], got {inputs.epsilon}")
    if not 0 < inputs.mu <= 1:
        raise ConfigurationError(f"mu must lie in (0, 1], got {inputs.mu}")
    if inputs.n < 1 or inputs.d < 1:
        raise ConfigurationError("n and d must be positive")
    if not inputs.L > 0 or not inputs.iota > 0:
        raise ConfigurationError("L and iota must be positive")
    if inputs.sigma < 0 or inputs.phi < 0 or inputs.f_gap < 0 or inputs.r < 0:
        raise ConfigurationError("sigma, phi, f gap and r must be nonnegative")
    if order == SECOND:
        if not inputs.rho > 0 or not inputs.sigma > 0:
            raise ConfigurationError("second-order schedule needs rho > 0 and sigma > 0")
        if not math.isfinite(inputs.f_max) or inputs.f_max <= 0:
            raise ConfigurationError("second-order schedule needs a finite positive f_max")


def param_schedule(order, inputs):
    """
    Evaluate the selected schedule.

    first:  T = kT max{(f0 - fmin)/(eta eps^2), chi^2 iota/(n p eps^2)}
            eta = keta min{mu eps / (L sqrt(mu Phi + chi^2 iota/(n p))), n p eps^2/(chi^2 L)}
            p = kp (1/mu) log(1/mu)
    second: T = kT max{iota^5 fmax/(eta eps^2), chi^2 iota/(n p eps^2)}
            eta = keta min{mu eps/(iota^5 L sqrt(mu Phi + chi^2 iota/(n p))),
                           iota sigma^2 sqrt(rho eps) log d / (L^2 (n p Phi + chi^2 iota/mu^2)),
                           n p eps^2/(iota^5 L chi^2)}
            p as above but at least the error-sum floor; r = kr sigma sqrt(iota d log d)
    with chi^2 = sigma^2 log d + r^2.
    """
    _check_inputs(order, inputs)
    k = inputs.kappas
    eps, mu, n, d, iota = inputs.epsilon, inputs.mu, inputs.n, inputs.d, inputs.iota
    log_d = math.log(d)

    p_formula = k.p * (1.0 / mu) * math.log(1.0 / mu)
    p = max(1, math.ceil(p_formula - 1e-12))
    p_clamped = p_formula < 1.0
    p_floor = p_lower_bound(mu)
    if order == SECOND and p < p_floor:
        logger.info(f"p raised from {p} to the error-sum floor {p_floor}")
        p = p_floor

    r = k.r * inputs.sigma * math.sqrt(iota * d * log_d) if order == SECOND else inputs.r
    chi_sq = inputs.sigma ** 2 * log_d + r ** 2
    np_ = n * p
    noise_term = chi_sq * iota / np_
    root = math.sqrt(mu * inputs.phi + noise_term)

    def ratio(num, den):
        return math.inf if den == 0 else num / den

    if order == FIRST:
        eta = k.eta * min(ratio(mu * eps, inputs.L * root), ratio(np_ * eps ** 2, chi_sq * inputs.L))
    else:
        i5 = iota ** 5
        eta = k.eta * min(
            ratio(mu * eps, i5 * inputs.L * root),
            ratio(iota * inputs.sigma ** 2 * math.sqrt(inputs.rho * eps) * log_d,
                  inputs.L ** 2 * (np_ * inputs.phi + chi_sq * iota / mu ** 2)),
            ratio(np_ * eps ** 2, i5 * inputs.L * chi_sq))
    if not math.isfinite(eta) or eta <= 0:
        raise ConfigurationError("step size is unbounded; initial gradient and noise are both zero")

    if order == FIRST:
        T = k.T * max(inputs.f_gap / (eta * eps ** 2), noise_term / eps ** 2)
        script_i = None
    else:
        T = k.T * max(iota ** 5 * inputs.f_max / (eta * eps ** 2), noise_term / eps ** 2)
        script_i = iota / (eta * math.sqrt(inputs.rho * eps))

    return ParamSchedule(order=order, T=max(1, math.ceil(T)), eta=eta, p=p, r=r, chi_sq=chi_sq,
                         phi=inputs.phi, iota=iota, p_formula=p_formula, p_floor=p_floor,
                         p_clamped=p_clamped, L_tilde=inputs.L_tilde, script_i=script_i)


def estimate_phi(problem, noise, x0, p, r, seed=0):
    """
    Phi = (1/n) sum_i ||noisy_grad_p f_i(x_0) + xi_0||^2 + L_tilde (f(x_0) - f_min), from one sample.
    """
    n, d = problem.n, problem.d
    x0 = np.asarray(x0, dtype=np.float64)
    xi = sample_perturbation(substream(seed, PHI_ESTIMATE, 0), r, n, p, d).xi
    total = 0.0
    for i in range(n):
        g = stochastic_gradient(problem, noise, i, x0, p, substream(seed, PHI_ESTIMATE, 0, i + 1))
        total += float(np.dot(g + xi, g + xi))
    return total / n + problem.L_tilde * (objective(problem, x0) - problem.f_min)


def schedule_for_problem(order, problem, noise, compressor, epsilon, x0=None, seed=0,
                         kappas=None, delta=FAILURE_BUDGET, r=0.0):
    """Build the schedule inputs from a problem (constants, estimate of Phi) and evaluate it."""
    kappas = kappas or Kappas()
    if not 0 < delta < 1:
        raise ConfigurationError(f"failure budget must lie in (0, 1), got {delta}")
    iota = math.log(1.0 / delta)
    mu = compressor.mu(problem.d)
    x0 = np.zeros(problem.d) if x0 is None else np.asarray(x0, dtype=np.float64)

    # p and r do not depend on Phi, so a Phi-free pass fixes them before estimating it
    draft = ScheduleInputs(epsilon=epsilon, mu=mu, n=problem.n, d=problem.d, sigma=noise.sigma,
                           L=problem.L, phi=1.0, f_gap=1.0, rho=problem.rho, f_max=problem.f_max,
                           r=r, iota=iota, kappas=kappas, L_tilde=problem.L_tilde)
    _check_inputs(order, draft)
    p = max(1, math.ceil(kappas.p * (1.0 / mu) * math.log(1.0 / mu) - 1e-12))
    if order == SECOND:
        p = max(p, p_lower_bound(mu))
        r = kappas.r * noise.sigma * math.sqrt(iota * problem.d * math.log(problem.d))

    phi = estimate_phi(problem, noise, x0, p, r, seed)
    inputs = ScheduleInputs(epsilon=epsilon, mu=mu, n=problem.n, d=problem.d, sigma=noise.sigma,
                            L=problem.L, phi=phi, f_gap=objective(problem, x0) - problem.f_min,
                            rho=problem.rho, f_max=problem.f_max, r=r, iota=iota, kappas=kappas,
                            L_tilde=problem.L_tilde)
    return param_schedule(order, inputs)
