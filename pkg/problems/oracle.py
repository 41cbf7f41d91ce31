"""
Module Name: oracle.py
Description: The norm-subGaussian stochastic gradient oracle used by every client.
Date: 2026-10-19
"""

from dataclasses import dataclass

import numpy as np

from configs.errors import ConfigurationError
from problems.problems import local_gradient


@dataclass(frozen=True)
class NoiseModel:
    """
    Additive zero-mean Gaussian noise with per-coordinate variance sigma^2 / d, so E||zeta||^2 = sigma^2.
    """
    sigma: float = 0.0
    kind: str = "gaussian"

    def __post_init__(self):
        if self.sigma < 0:
            raise ConfigurationError(f"sigma must be nonnegative, got {self.sigma}")
        if self.kind != "gaussian":
            raise ConfigurationError(f"unsupported noise kind {self.kind!r}")

    @classmethod
    def from_problem(cls, problem):
        return cls(sigma=problem.sigma)

    def draw(self, d, batch, rng):
        """Mean of `batch` independent noise queries."""
        if self.sigma == 0.0:
            return np.zeros(d)
        draws = rng.standard_normal((batch, d)) * (self.sigma / np.sqrt(d))
        return draws.mean(axis=0)


def stochastic_gradient(spec, noise, i, x, batch, rng):
    """
    Mini-batch oracle: local_gradient(i, x) plus the mean of `batch` independent noise draws.
    """
    if int(batch) != batch or batch < 1:
        raise ConfigurationError(f"batch must be >= 1, got {batch}")
    grad = local_gradient(spec, i, x)
    return grad + noise.draw(spec.d, int(batch), rng)
