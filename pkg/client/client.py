"""
Module Name: client.py
Description: The client side of a Power-EF round. Each client keeps its error-feedback memory
             (current error, previous error, current gradient estimate), compresses the change in its
             error with the FCC encoder, compresses the remaining correction, and uploads both.
Date: 2026-10-19
"""

from dataclasses import dataclass

import numpy as np

from configs.config import INDEX_BYTES, VALUE_BYTES
from configs.errors import DimensionError
from compress.compressors import SparseMessage, compress, payload_bytes
from compress.fcc import FccPacket, fcc_encode, fcc_decode


@dataclass(frozen=True)
class PerturbationSample:
    """The round's Gaussian perturbation; the same vector goes to every client."""
    xi: np.ndarray


@dataclass(frozen=True, eq=False)
class ClientState:
    e_cur: np.ndarray
    e_prev: np.ndarray
    g_prev: np.ndarray

    @classmethod
    def zeros(cls, d):
        return cls(np.zeros(d), np.zeros(d), np.zeros(d))

    @property
    def d(self):
        return self.e_cur.size


@dataclass(frozen=True)
class Uplink:
    """What one client uploads in one round: the FCC pieces of its error change, then c."""
    packet: FccPacket
    c: SparseMessage

    def messages(self):
        return list(self.packet.pieces) + [self.c]

    def payload_bytes(self, index_bytes=INDEX_BYTES, value_bytes=VALUE_BYTES):
        return self.packet.payload_bytes(index_bytes, value_bytes) + payload_bytes(self.c, index_bytes, value_bytes)


def _check(name, vec, d):
    vec = np.asarray(vec, dtype=np.float64)
    if vec.shape != (d,):
        raise DimensionError(f"{name} has shape {vec.shape}, expected ({d},)")
    return vec


def client_step(state, x_t, xi, grad, spec, p, rng=None, hook=None):
    """
    One client round.

        w     = FCC_p(e_cur - e_prev)
        c     = C(e_cur + grad + xi - g_prev - w)
        g_new = g_prev + w + c
        e_new = e_cur + grad + xi - g_new

    grad is the raw minibatch gradient at x_t; the perturbation is added here.
    hook, if given, is called as hook(msg) for every message put on the wire.

    Returns:
        (Uplink, new ClientState) where the new state is {e_prev: e_cur, e_cur: e_new, g_prev: g_new}.
    """
    d = state.d
    _check("x_t", x_t, d)
    xi = _check("xi", xi.xi if isinstance(xi, PerturbationSample) else xi, d)
    grad = _check("grad", grad, d)
    _check("e_prev", state.e_prev, d)
    _check("g_prev", state.g_prev, d)

    packet = fcc_encode(spec, state.e_cur - state.e_prev, p, rng)
    w = fcc_decode(packet)
    s = state.e_cur + grad + xi
    c = compress(spec, s - state.g_prev - w, rng)
    # same operation order as the server's copy of this estimate
    g_new = (state.g_prev + w) + c.densify()
    e_new = s - g_new

    uplink = Uplink(packet, c)
    if hook is not None:
        for msg in uplink.messages():
            hook(msg)
    return uplink, ClientState(e_new, state.e_cur, g_new)
