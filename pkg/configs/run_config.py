"""
Module Name: run_config.py
Description: Hyperparameters of one algorithm run (step size, FCC exponent / minibatch size,
             perturbation radius, iteration count, compressor, sizes, seed, schedule multipliers).
Date: 2026-10-19
"""

from dataclasses import dataclass, field
from typing import Optional

from configs.config import DEFAULT_KAPPA
from configs.errors import ConfigurationError


@dataclass(frozen=True)
class Kappas:
    """Multipliers applied to the schedule formulas for T, eta, p and r."""
    T: float = DEFAULT_KAPPA
    eta: float = DEFAULT_KAPPA
    p: float = DEFAULT_KAPPA
    r: float = DEFAULT_KAPPA

    def __post_init__(self):
        for name in ("T", "eta", "p", "r"):
            if not getattr(self, name) > 0:
                raise ConfigurationError(f"kappa_{name} must be positive")


@dataclass(frozen=True)
class RunConfig:
    """
    p drives both the FCC round count and the minibatch size unless p_fcc / p_batch override one.
    """
    eta: float
    p: int
    r: float
    T: int
    compressor: object
    n: int
    d: int
    seed: int = 0
    kappas: Kappas = field(default_factory=Kappas)
    p_fcc: Optional[int] = None
    p_batch: Optional[int] = None

    def __post_init__(self):
        if not self.eta >= 0:
            raise ConfigurationError(f"eta must be nonnegative, got {self.eta}")
        for name in ("p", "T", "n", "d"):
            value = getattr(self, name)
            if int(value) != value or value < 1:
                raise ConfigurationError(f"{name} must be a positive integer, got {value}")
        for name in ("p_fcc", "p_batch"):
            value = getattr(self, name)
            if value is not None and (int(value) != value or value < 1):
                raise ConfigurationError(f"{name} must be a positive integer, got {value}")
        if not self.r >= 0:
            raise ConfigurationError(f"r must be nonnegative, got {self.r}")
        if int(self.seed) != self.seed or self.seed < 0:
            raise ConfigurationError(f"seed must be a nonnegative integer, got {self.seed}")
        self.compressor.check_dim(self.d)

    @property
    def fcc_rounds(self):
        return int(self.p_fcc if self.p_fcc is not None else self.p)

    @property
    def batch_size(self):
        return int(self.p_batch if self.p_batch is not None else self.p)

    def check_problem(self, problem):
        if problem.n != self.n or problem.d != self.d:
            raise ConfigurationError(
                f"run configured for n={self.n}, d={self.d} but problem has n={problem.n}, d={problem.d}")
