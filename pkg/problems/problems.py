"""
Module Name: problems.py
Description: Synthetic finite-sum objectives f = (1/n) sum_i f_i with closed-form gradients and
             Hessian-vector products.

             saddle_quartic:           f(x) = (x_1^2 - 1)^2 / 4 + 1/2 sum_{j>=2} x_j^2,
                                       f_i(x) = f(x) + a_i^T x
             heterogeneous_quadratic:  f_i(x) = 1/2 x^T (A + Delta_i) x + b_i^T x

             The local perturbations a_i, Delta_i and b_i - mean(b) sum to zero over clients, so the
             heterogeneity knob moves local gradients apart without touching f, grad f or the Hessian.
Date: 2026-10-19
"""

from dataclasses import dataclass, field, fields
from typing import Optional

import numpy as np

from configs.config import BOX_BOUND, QUADRATIC_EIG_MIN, QUADRATIC_EIG_MAX, debug
from configs.errors import ConfigurationError, ClientIndexError, DimensionError
from problems.streams import substream, PROBLEM

SADDLE_QUARTIC = "saddle_quartic"
HETEROGENEOUS_QUADRATIC = "heterogeneous_quadratic"


@dataclass(frozen=True, eq=False)
class ProblemSpec:
    family: str
    n: int
    d: int
    heterogeneity: float
    seed: int
    L: float
    rho: float
    f_min: float
    f_max: float
    L_tilde: float
    sigma: float = 0.0
    box: float = BOX_BOUND
    # saddle_quartic: linear shifts a_i, shape (n, d)
    shifts: Optional[np.ndarray] = field(default=None, repr=False)
    # heterogeneous_quadratic
    A: Optional[np.ndarray] = field(default=None, repr=False)
    local_A: Optional[np.ndarray] = field(default=None, repr=False)
    b_mean: Optional[np.ndarray] = field(default=None, repr=False)
    local_b: Optional[np.ndarray] = field(default=None, repr=False)

    def __eq__(self, other):
        if not isinstance(other, ProblemSpec):
            return NotImplemented
        for f in fields(self):
            mine, theirs = getattr(self, f.name), getattr(other, f.name)
            if isinstance(mine, np.ndarray) or isinstance(theirs, np.ndarray):
                if mine is None or theirs is None or not np.array_equal(mine, theirs):
                    return False
            elif mine != theirs:
                return False
        return True

    __hash__ = None

    def minimizer(self):
        """Global minimizer (quadratic only)."""
        if self.family != HETEROGENEOUS_QUADRATIC:
            raise ConfigurationError("closed-form minimizer only exists for the quadratic family")
        return -np.linalg.solve(self.A, self.b_mean)


def _check_x(spec, x):
    x = np.asarray(x, dtype=np.float64)
    if x.shape != (spec.d,):
        raise DimensionError(f"expected a vector of length {spec.d}, got shape {x.shape}")
    return x


def _check_client(spec, i):
    if not 0 <= i < spec.n:
        raise ClientIndexError(f"client {i} outside [0, {spec.n})")


# ----------------------------
# Objective values
# ----------------------------

def objective(spec, x):
    """Global f(x) in closed form."""
    x = _check_x(spec, x)
    if spec.family == SADDLE_QUARTIC:
        return float((x[0] ** 2 - 1.0) ** 2 / 4.0 + 0.5 * np.dot(x[1:], x[1:]))
    return float(0.5 * x @ spec.A @ x + spec.b_mean @ x)


def local_objective(spec, i, x):
    _check_client(spec, i)
    x = _check_x(spec, x)
    if spec.family == SADDLE_QUARTIC:
        return objective(spec, x) + float(spec.shifts[i] @ x)
    return float(0.5 * x @ spec.local_A[i] @ x + spec.local_b[i] @ x)


# ----------------------------
# Gradients
# ----------------------------

def _quartic_gradient(x):
    grad = x.copy()
    grad[0] = (x[0] ** 2 - 1.0) * x[0]
    return grad


def gradient(spec, x):
    """Closed-form grad f(x), computed directly rather than through the clients."""
    x = _check_x(spec, x)
    if spec.family == SADDLE_QUARTIC:
        return _quartic_gradient(x)
    return spec.A @ x + spec.b_mean


def local_gradient(spec, i, x):
    """Exact grad f_i(x)."""
    _check_client(spec, i)
    x = _check_x(spec, x)
    if spec.family == SADDLE_QUARTIC:
        return _quartic_gradient(x) + spec.shifts[i]
    return spec.local_A[i] @ x + spec.local_b[i]


def global_gradient(spec, x):
    """(1/n) sum_i grad f_i(x), summed in ascending client order."""
    acc = np.zeros(spec.d)
    for i in range(spec.n):
        acc += local_gradient(spec, i, x)
    return acc / spec.n


# ----------------------------
# Second order
# ----------------------------

def hessian(spec, x):
    x = _check_x(spec, x)
    if spec.family == SADDLE_QUARTIC:
        diag = np.ones(spec.d)
        diag[0] = 3.0 * x[0] ** 2 - 1.0
        return np.diag(diag)
    return spec.A.copy()


def hvp(spec, x, v):
    """Exact Hessian-vector product of the global objective."""
    x = _check_x(spec, x)
    v = _check_x(spec, v)
    if spec.family == SADDLE_QUARTIC:
        out = v.copy()
        out[0] = (3.0 * x[0] ** 2 - 1.0) * v[0]
        return out
    return spec.A @ v


@dataclass(frozen=True, eq=False)
class HvpOracle:
    """v -> grad^2 f(x) v for a fixed evaluation point."""
    problem: ProblemSpec
    x: np.ndarray

    @property
    def d(self):
        return self.problem.d

    def __call__(self, v):
        return hvp(self.problem, self.x, v)


# ----------------------------
# Construction
# ----------------------------

def _zero_sum_spread(rng, n, shape, heterogeneity):
    """n perturbations summing to zero with root-mean-square norm equal to heterogeneity."""
    raw = rng.standard_normal((n,) + shape)
    if shape and len(shape) == 2:
        raw = 0.5 * (raw + np.swapaxes(raw, 1, 2))
    raw -= raw.mean(axis=0)
    rms = np.sqrt(np.mean(np.sum(raw.reshape(n, -1) ** 2, axis=1)))
    if heterogeneity == 0.0 or rms == 0.0:
        return np.zeros((n,) + shape)
    return raw * (heterogeneity / rms)


def make_problem(family, n, d, heterogeneity=0.0, seed=0, sigma=0.0, box=BOX_BOUND):
    """
    Build a ProblemSpec. The shared part of the objective is drawn from streams that do not depend
    on heterogeneity, so two problems differing only in heterogeneity share f exactly.
    """
    if int(n) != n or n < 1:
        raise ConfigurationError(f"n must be >= 1, got {n}")
    if int(d) != d or d < 2:
        raise ConfigurationError(f"d must be >= 2, got {d}")
    if heterogeneity < 0:
        raise ConfigurationError(f"heterogeneity must be nonnegative, got {heterogeneity}")
    if sigma < 0:
        raise ConfigurationError(f"sigma must be nonnegative, got {sigma}")
    n, d = int(n), int(d)
    spread_rng = substream(seed, PROBLEM, 1)

    if family == SADDLE_QUARTIC:
        shifts = _zero_sum_spread(spread_rng, n, (d,), heterogeneity)
        L = max(3.0 * box ** 2 - 1.0, 1.0)
        f_max = (box ** 2 - 1.0) ** 2 / 4.0 + 0.5 * (d - 1) * box ** 2
        spec = ProblemSpec(family, n, d, float(heterogeneity), seed, L=L, rho=6.0 * box,
                           f_min=0.0, f_max=f_max, L_tilde=L, sigma=float(sigma), box=box,
                           shifts=shifts)
    elif family == HETEROGENEOUS_QUADRATIC:
        base_rng = substream(seed, PROBLEM, 0)
        q, _ = np.linalg.qr(base_rng.standard_normal((d, d)))
        eigs = np.linspace(QUADRATIC_EIG_MIN, QUADRATIC_EIG_MAX, d)
        A = (q * eigs) @ q.T
        A = 0.5 * (A + A.T)
        b_mean = base_rng.standard_normal(d)
        deltas = _zero_sum_spread(spread_rng, n, (d, d), heterogeneity)
        offsets = _zero_sum_spread(spread_rng, n, (d,), heterogeneity)
        local_A = A[None, :, :] + deltas
        local_b = b_mean[None, :] + offsets
        L = float(np.linalg.eigvalsh(A)[-1])
        x_star = -np.linalg.solve(A, b_mean)
        f_min = float(0.5 * b_mean @ x_star)
        f_max = 0.5 * L * (np.sqrt(d) * box + np.linalg.norm(x_star)) ** 2
        local_L = np.array([np.linalg.norm(a, 2) for a in local_A])
        spec = ProblemSpec(family, n, d, float(heterogeneity), seed, L=L, rho=0.0,
                           f_min=f_min, f_max=float(f_max),
                           L_tilde=float(np.sqrt(np.mean(local_L ** 2))), sigma=float(sigma),
                           box=box, A=A, local_A=local_A, b_mean=b_mean, local_b=local_b)
    else:
        raise ConfigurationError(f"unknown problem family {family!r}")

    debug(f"built {family} problem n={n} d={d} heterogeneity={heterogeneity} L={spec.L:.4g}")
    return spec
