"""
Module Name: server.py
Description: The parameter server of Power-EF and the synchronous round loop. Each round the server
             samples and broadcasts a perturbation, collects every client's uplink, rebuilds the global
             gradient estimate from the uplinks and takes a step.
Date: 2026-10-19
"""

from dataclasses import dataclass

import numpy as np

from configs.config import VALUE_BYTES, debug, logger
from configs.errors import UplinkCountError, DimensionError
from compress.fcc import fcc_decode
from client.client import ClientState, PerturbationSample, client_step
from problems.oracle import stochastic_gradient
from problems.streams import substream, NOISE, PERTURBATION, COMPRESSOR
from protocols import custom_protocol
from server.trace import TraceRecorder
from server.utils import ClientPool, ordered_mean

POWER_EF = "power_ef"


@dataclass(frozen=True, eq=False)
class ServerState:
    """
    x: current model. g_prev: global gradient estimate of the last round.
    client_estimates: the server's copy of every g^(i), rebuilt from uplinks alone; g_prev is their
    ascending-index average, which equals g_{t-1} + (1/n) sum_i (FCC_i + c_i).
    """
    x: np.ndarray
    g_prev: np.ndarray
    client_estimates: np.ndarray

    @classmethod
    def initial(cls, x0, n):
        x0 = np.array(x0, dtype=np.float64)
        return cls(x0, np.zeros_like(x0), np.zeros((n, x0.size)))

    @property
    def n(self):
        return self.client_estimates.shape[0]


def sample_perturbation(rng, r, n, p, d):
    """xi ~ N(0, r^2 / (n p d) I)."""
    if r == 0:
        return PerturbationSample(np.zeros(d))
    scale = r / np.sqrt(n * p * d)
    return PerturbationSample(rng.standard_normal(d) * scale)


def server_step(state, uplinks, eta):
    """
    g_t = g_{t-1} + (1/n) sum_i [FCC_i + c_i];  x_{t+1} = x_t - eta g_t.

    Returns:
        (new ServerState, the model broadcast to clients)
    """
    if len(uplinks) != state.n:
        raise UplinkCountError(f"expected {state.n} uplinks, got {len(uplinks)}")
    estimates = np.empty_like(state.client_estimates)
    for i, uplink in enumerate(uplinks):
        if uplink.c.dim != state.x.size:
            raise DimensionError(f"uplink {i} has dimension {uplink.c.dim}")
        estimates[i] = (state.client_estimates[i] + fcc_decode(uplink.packet)) + uplink.c.densify()
    g = ordered_mean(estimates)
    x_next = state.x - eta * g
    return ServerState(x_next, g, estimates), x_next.copy()


def draw_round(config, problem, noise, t, x):
    """The round's perturbation and every client's minibatch gradient at x."""
    xi = sample_perturbation(substream(config.seed, PERTURBATION, t), config.r, config.n,
                             config.batch_size, config.d)
    grads = np.array([
        stochastic_gradient(problem, noise, i, x, config.batch_size, substream(config.seed, NOISE, t, i))
        for i in range(config.n)
    ])
    return xi, grads


def run_power_ef(config, problem, noise, x0=None, stop=None, ledger=None, workers=None,
                 keep_frames=False):
    """
    Run T rounds of Power-EF. Deterministic given config.seed.

    stop, if given, is called as stop(t, x_t) after each round and ends the run when it returns True.
    ledger, if given, receives every uplink message (independent byte count).
    keep_frames stores every round's framed uplinks on the trace.
    """
    config.check_problem(problem)
    n, d = config.n, config.d
    x0 = np.zeros(d) if x0 is None else np.array(x0, dtype=np.float64)
    server = ServerState.initial(x0, n)
    clients = [ClientState.zeros(d) for _ in range(n)]
    recorder = TraceRecorder(POWER_EF, config.eta, n, config.batch_size, config.seed, x0, keep_frames)
    downlink = n * d * VALUE_BYTES
    stopped = False

    with ClientPool(workers) as pool:
        for t in range(config.T):
            x = server.x
            xi, grads = draw_round(config, problem, noise, t, x)

            def step(i):
                hook = None if ledger is None else (lambda msg, i=i: ledger.record(i, msg))
                return client_step(clients[i], x, xi, grads[i], config.compressor, config.fcc_rounds,
                                   substream(config.seed, COMPRESSOR, t, i), hook)

            results = pool.map(step, n)
            uplinks = [uplink for uplink, _ in results]
            clients = [state for _, state in results]
            server, _ = server_step(server, uplinks, config.eta)

            if keep_frames:
                recorder.frames.append(b"".join(
                    custom_protocol.wrap_uplink(t, i, up.packet, up.c) for i, up in enumerate(uplinks)))
            recorder.record(
                server.x, ordered_mean(c.e_cur for c in clients), server.g_prev,
                ordered_mean(c.g_prev for c in clients), xi.xi, grads,
                sum(up.payload_bytes() for up in uplinks), downlink)

            if not np.all(np.isfinite(server.x)):
                logger.warning(f"power_ef diverged at round {t} (seed {config.seed})")
                stopped = True
                break
            if stop is not None and stop(t + 1, server.x):
                stopped = True
                break

    debug(f"power_ef finished {len(recorder.estimates)} rounds (seed {config.seed})")
    return recorder.finish(stopped)
