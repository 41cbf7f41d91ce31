"""
Module Name: baselines.py
Description: Reference algorithms run over the same round structure as Power-EF:
               dsgd        - every client uploads its gradient uncompressed
               naive_csgd  - every client uploads the compressed gradient, no feedback
               classic_ef  - every client keeps the compression residual and adds it back next round
             When r > 0 every baseline adds the round's perturbation to each client's gradient, using
             the same random stream as Power-EF.
Date: 2026-10-19
"""

import numpy as np

from configs.config import VALUE_BYTES, debug, logger
from configs.errors import ConfigurationError
from compress.compressors import compress, payload_bytes
from problems.streams import substream, COMPRESSOR
from server.server import draw_round
from server.trace import TraceRecorder
from server.utils import ClientPool, ordered_mean

DSGD = "dsgd"
NAIVE_CSGD = "naive_csgd"
CLASSIC_EF = "classic_ef"
BASELINES = (DSGD, NAIVE_CSGD, CLASSIC_EF)


def run_baseline(kind, config, problem, noise, x0=None, stop=None, ledger=None, workers=None):
    """
    DSGD:        x_{t+1} = x_t - eta (1/n) sum_i g_i
    NaiveCSGD:   x_{t+1} = x_t - eta (1/n) sum_i C(g_i)
    ClassicEF:   m_i = e_i + g_i; upload C(m_i); e_i = m_i - C(m_i); server averages and steps
    where g_i is the minibatch gradient (plus the perturbation when r > 0).
    """
    if kind not in BASELINES:
        raise ConfigurationError(f"unknown baseline {kind!r}")
    config.check_problem(problem)
    n, d = config.n, config.d
    x = np.zeros(d) if x0 is None else np.array(x0, dtype=np.float64)
    errors = [np.zeros(d) for _ in range(n)]
    recorder = TraceRecorder(kind, config.eta, n, config.batch_size, config.seed, x)
    downlink = n * d * VALUE_BYTES
    stopped = False

    with ClientPool(workers) as pool:
        for t in range(config.T):
            xi, grads = draw_round(config, problem, noise, t, x)
            x_t = x

            def step(i):
                g = grads[i] + xi.xi
                if kind == DSGD:
                    if ledger is not None:
                        ledger.record_dense(i, d)
                    return g, d * VALUE_BYTES, errors[i]
                m = errors[i] + g if kind == CLASSIC_EF else g
                msg = compress(config.compressor, m, substream(config.seed, COMPRESSOR, t, i))
                if ledger is not None:
                    ledger.record(i, msg)
                sent = msg.densify()
                residual = m - sent if kind == CLASSIC_EF else errors[i]
                return sent, payload_bytes(msg), residual

            results = pool.map(step, n)
            received = [sent for sent, _, _ in results]
            errors = [residual for _, _, residual in results]
            g = ordered_mean(received)
            x = x_t - config.eta * g

            recorder.record(x, ordered_mean(errors), g, g, xi.xi, grads,
                            sum(size for _, size, _ in results), downlink)
            if not np.all(np.isfinite(x)):
                logger.warning(f"{kind} diverged at round {t} (seed {config.seed})")
                stopped = True
                break
            if stop is not None and stop(t + 1, x):
                stopped = True
                break

    debug(f"{kind} finished {len(recorder.estimates)} rounds (seed {config.seed})")
    return recorder.finish(stopped)
