"""
Module Name: fcc.py
Description: Fast compressed communication. The encoder compresses the input, then keeps compressing
             what is left of it for p rounds; the decoder adds the p pieces back together. With a
             mu-compressor the leftover shrinks by a factor (1 - mu) per round.
Date: 2026-10-19
"""

from dataclasses import dataclass
from typing import Tuple

import numpy as np

from configs.config import INDEX_BYTES, VALUE_BYTES
from configs.errors import ConfigurationError, DimensionError
from compress.compressors import SparseMessage, compress, payload_bytes, as_vector


@dataclass(frozen=True)
class FccPacket:
    pieces: Tuple[SparseMessage, ...]

    @property
    def dim(self):
        if not self.pieces:
            raise DimensionError("empty packet has no dimension")
        return self.pieces[0].dim

    def __len__(self):
        return len(self.pieces)

    def payload_bytes(self, index_bytes=INDEX_BYTES, value_bytes=VALUE_BYTES):
        return sum(payload_bytes(piece, index_bytes, value_bytes) for piece in self.pieces)


def _accumulate(out, piece):
    # indices are unique within a piece, so plain fancy-index addition is exact
    out[piece.indices] += piece.values


def fcc_encode(spec, x, p, rng=None):
    """
    v_1 = x, v_l = x - sum_{j<l} C(v_j); returns the pieces C(v_1), ..., C(v_p).
    """
    if int(p) != p or p < 1:
        raise ConfigurationError(f"FCC needs p >= 1, got {p}")
    x = as_vector(x)
    acc = np.zeros_like(x)
    v = x.copy()
    pieces = []
    for _ in range(int(p)):
        piece = compress(spec, v, rng)
        pieces.append(piece)
        _accumulate(acc, piece)
        v = x - acc
    return FccPacket(tuple(pieces))


def fcc_decode(packet):
    """
    Sum of the densified pieces, in ascending piece order then ascending coordinate.
    """
    dim = packet.dim
    out = np.zeros(dim)
    for piece in packet.pieces:
        if piece.dim != dim:
            raise DimensionError(f"piece of dimension {piece.dim} in a packet of dimension {dim}")
        _accumulate(out, piece)
    return out
