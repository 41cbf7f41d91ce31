"""
Module Name: trace.py
Description: Per-round record of a run and the offline diagnostics computed from it: corrected
             iterates y_t = x_t - eta * e_t, the global noise zeta_t and psi_t = zeta_t + xi_t, and the
             residuals of the bookkeeping identities the algorithm must satisfy.
Date: 2026-10-19
"""

from dataclasses import dataclass, field

import numpy as np

from problems.problems import global_gradient, local_gradient
from server.utils import ordered_mean


@dataclass(eq=False)
class RoundTrace:
    """
    iterates and errors have one row per x_0 .. x_R; every other per-round array has R rows,
    where R is the number of completed rounds.
    """
    algorithm: str
    eta: float
    n: int
    batch: int
    seed: int
    iterates: np.ndarray
    errors: np.ndarray
    estimates: np.ndarray
    client_estimate_means: np.ndarray
    perturbations: np.ndarray
    client_gradients: np.ndarray
    uplink_bytes: np.ndarray
    downlink_bytes: np.ndarray
    stopped_early: bool = False
    uplink_frames: list = field(default_factory=list, repr=False)

    @classmethod
    def from_iterates(cls, xs, algorithm="synthetic", eta=0.0):
        """A trace holding only iterates, for scoring externally produced points."""
        xs = np.atleast_2d(np.asarray(xs, dtype=np.float64))
        rounds, d = xs.shape[0] - 1, xs.shape[1]
        empty = np.zeros((rounds, d))
        return cls(algorithm, eta, 1, 1, 0, xs, np.zeros_like(xs), empty, empty.copy(), empty.copy(),
                   np.zeros((rounds, 1, d)), np.zeros(rounds, dtype=np.int64),
                   np.zeros(rounds, dtype=np.int64))

    @property
    def rounds(self):
        return self.estimates.shape[0]

    @property
    def final(self):
        return self.iterates[-1]

    def cumulative_uplink(self):
        return np.cumsum(self.uplink_bytes)

    def cumulative_downlink(self):
        return np.cumsum(self.downlink_bytes)

    def corrected_iterates(self):
        return self.iterates - self.eta * self.errors

    def global_noise(self, problem):
        """zeta_t = (1/n) sum_i (noisy_grad_i - grad f_i)(x_t)."""
        zeta = np.zeros_like(self.estimates)
        for t in range(self.rounds):
            x = self.iterates[t]
            exact = [local_gradient(problem, i, x) for i in range(self.n)]
            zeta[t] = ordered_mean(self.client_gradients[t]) - ordered_mean(exact)
        return zeta

    def psi(self, problem):
        return self.global_noise(problem) + self.perturbations

    def recurrence_residuals(self, problem):
        """
        ||y_{t+1} - (y_t - eta (grad f(x_t) + psi_t))|| and ||y_t|| for every completed round.
        """
        y = self.corrected_iterates()
        psi = self.psi(problem)
        residuals = np.zeros(self.rounds)
        for t in range(self.rounds):
            predicted = y[t] - self.eta * (global_gradient(problem, self.iterates[t]) + psi[t])
            residuals[t] = np.linalg.norm(y[t + 1] - predicted)
        return residuals, np.linalg.norm(y[:-1], axis=1)

    def error_update_residuals(self, problem):
        """||e_{t+1} - (e_t + grad f(x_t) + psi_t - g_t)|| for every completed round."""
        psi = self.psi(problem)
        residuals = np.zeros(self.rounds)
        for t in range(self.rounds):
            predicted = (self.errors[t] + global_gradient(problem, self.iterates[t]) + psi[t]
                         - self.estimates[t])
            residuals[t] = np.linalg.norm(self.errors[t + 1] - predicted)
        return residuals


class TraceRecorder:
    """Collects per-round rows during a run and freezes them into a RoundTrace."""

    def __init__(self, algorithm, eta, n, batch, seed, x0, keep_frames=False):
        self.algorithm = algorithm
        self.eta = eta
        self.n = n
        self.batch = batch
        self.seed = seed
        self.iterates = [np.array(x0, dtype=np.float64)]
        self.errors = [np.zeros_like(self.iterates[0])]
        self.estimates = []
        self.client_estimate_means = []
        self.perturbations = []
        self.client_gradients = []
        self.uplink_bytes = []
        self.downlink_bytes = []
        self.keep_frames = keep_frames
        self.frames = []

    def record(self, x_next, error_next, estimate, client_estimate_mean, xi, grads, uplink, downlink):
        self.iterates.append(np.array(x_next))
        self.errors.append(np.array(error_next))
        self.estimates.append(np.array(estimate))
        self.client_estimate_means.append(np.array(client_estimate_mean))
        self.perturbations.append(np.array(xi))
        self.client_gradients.append(np.array(grads))
        self.uplink_bytes.append(int(uplink))
        self.downlink_bytes.append(int(downlink))

    def finish(self, stopped_early=False):
        d = self.iterates[0].size
        rounds = len(self.estimates)

        def stack(rows, shape):
            return np.array(rows) if rows else np.zeros(shape)

        return RoundTrace(
            algorithm=self.algorithm, eta=self.eta, n=self.n, batch=self.batch, seed=self.seed,
            iterates=np.array(self.iterates), errors=np.array(self.errors),
            estimates=stack(self.estimates, (0, d)),
            client_estimate_means=stack(self.client_estimate_means, (0, d)),
            perturbations=stack(self.perturbations, (0, d)),
            client_gradients=stack(self.client_gradients, (0, self.n, d)),
            uplink_bytes=np.array(self.uplink_bytes, dtype=np.int64).reshape(rounds),
            downlink_bytes=np.array(self.downlink_bytes, dtype=np.int64).reshape(rounds),
            stopped_early=stopped_early, uplink_frames=self.frames)
