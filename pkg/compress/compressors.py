"""
Module Name: compressors.py
Description: mu-compressors (Top-k, Random-k, general biased rounding) and the SparseMessage payload
             they produce. A compressor maps a dense vector to a sparse (index, value) message; the
             server densifies it back by scattering the entries into a zero vector.
Date: 2026-10-19
"""

from dataclasses import dataclass
from typing import Optional

import numpy as np

from configs.config import INDEX_BYTES, VALUE_BYTES, DEFAULT_ROUNDING_BASE, debug
from configs.errors import ConfigurationError, DimensionError

TOPK = "topk"
RANDOMK = "randomk"
ROUNDING = "rounding"


@dataclass(frozen=True)
class CompressorSpec:
    """
    Description of a mu-compressor.

    kind: one of "topk", "randomk", "rounding".
    k: coordinates kept (topk / randomk only).
    base: rounding base > 1 (rounding only).
    dim: optional dimension the compressor is bound to; inputs of another length are rejected.
    """
    kind: str
    k: Optional[int] = None
    base: Optional[float] = None
    dim: Optional[int] = None

    def __post_init__(self):
        if self.kind in (TOPK, RANDOMK):
            if self.k is None or int(self.k) != self.k or self.k < 1:
                raise ConfigurationError(f"{self.kind} needs a positive integer k, got {self.k}")
            if self.dim is not None and self.k > self.dim:
                raise ConfigurationError(f"k={self.k} exceeds dimension {self.dim}")
        elif self.kind == ROUNDING:
            if self.base is None:
                object.__setattr__(self, "base", DEFAULT_ROUNDING_BASE)
            if not self.base > 1.0:
                raise ConfigurationError(f"rounding base must exceed 1, got {self.base}")
        else:
            raise ConfigurationError(f"unknown compressor kind {self.kind!r}")

    @classmethod
    def topk(cls, k, dim=None):
        return cls(TOPK, k=k, dim=dim)

    @classmethod
    def randomk(cls, k, dim=None):
        return cls(RANDOMK, k=k, dim=dim)

    @classmethod
    def rounding(cls, base=DEFAULT_ROUNDING_BASE, dim=None):
        return cls(ROUNDING, base=base, dim=dim)

    @property
    def expectation_only(self):
        """Random-k contracts only in expectation, not on every call."""
        return self.kind == RANDOMK

    def mu(self, d=None):
        """Guaranteed contraction factor for vectors of dimension d."""
        if self.kind == ROUNDING:
            return 1.0 - (1.0 - 1.0 / self.base) ** 2
        d = self.dim if d is None else d
        if d is None:
            raise ConfigurationError("dimension needed to evaluate mu for a sparsifier")
        self.check_dim(d)
        return self.k / d

    def check_dim(self, d):
        if self.dim is not None and d != self.dim:
            raise DimensionError(f"compressor bound to d={self.dim}, input has d={d}")
        if self.kind in (TOPK, RANDOMK) and self.k > d:
            raise ConfigurationError(f"k={self.k} exceeds dimension {d}")

    def describe(self):
        if self.kind == ROUNDING:
            return f"rounding(base={self.base:g})"
        return f"{self.kind}(k={self.k})"


class SparseMessage:
    """
    One compressed payload: strictly increasing coordinates in [0, dim) and their values.
    """

    __slots__ = ("dim", "indices", "values")

    def __init__(self, dim, indices, values):
        indices = np.asarray(indices, dtype=np.int64).reshape(-1)
        values = np.asarray(values, dtype=np.float64).reshape(-1)
        if indices.shape != values.shape:
            raise DimensionError("index and value arrays differ in length")
        if indices.size:
            if indices[0] < 0 or indices[-1] >= dim:
                raise DimensionError(f"coordinate outside [0, {dim})")
            if np.any(np.diff(indices) <= 0):
                raise DimensionError("coordinates must be strictly increasing")
        self.dim = int(dim)
        self.indices = indices
        self.values = values

    @classmethod
    def from_entries(cls, dim, entries):
        entries = list(entries)
        return cls(dim, [i for i, _ in entries], [v for _, v in entries])

    @classmethod
    def empty(cls, dim):
        return cls(dim, [], [])

    @property
    def entries(self):
        return [(int(i), float(v)) for i, v in zip(self.indices, self.values)]

    def __len__(self):
        return int(self.indices.size)

    def __eq__(self, other):
        if not isinstance(other, SparseMessage):
            return NotImplemented
        return (self.dim == other.dim
                and np.array_equal(self.indices, other.indices)
                and np.array_equal(self.values, other.values))

    def __repr__(self):
        return f"SparseMessage(dim={self.dim}, entries={self.entries})"

    def densify(self):
        out = np.zeros(self.dim)
        out[self.indices] = self.values
        return out


def densify(msg):
    """Scatter the message entries into a zero vector of length msg.dim."""
    return msg.densify()


def as_vector(x):
    x = np.asarray(x, dtype=np.float64)
    if x.ndim != 1:
        raise DimensionError(f"expected a 1-D vector, got shape {x.shape}")
    return x


def _round_down_to_power(magnitudes, base):
    # base**m <= |x| < base**(m+1), fixed up where log rounding lands one off
    m = np.floor(np.log(magnitudes) / np.log(base))
    rounded = np.power(base, m)
    low = rounded > magnitudes
    m[low] -= 1
    rounded[low] = np.power(base, m[low])
    high = rounded * base <= magnitudes
    m[high] += 1
    rounded[high] = np.power(base, m[high])
    return rounded


def compress(spec, x, rng=None):
    """
    Apply the compressor described by spec to x.

    Top-k keeps the k largest magnitudes (ties go to the lower coordinate) and always emits k
    entries. Random-k keeps k uniformly drawn coordinates and needs rng. Biased rounding maps every
    nonzero x_i to sign(x_i) * base**floor(log_base |x_i|); exact zeros are left out.
    """
    x = as_vector(x)
    d = x.size
    spec.check_dim(d)

    if spec.kind == TOPK:
        order = np.argsort(-np.abs(x), kind="stable")[:spec.k]
        idx = np.sort(order)
        return SparseMessage(d, idx, x[idx])

    if spec.kind == RANDOMK:
        if rng is None:
            raise ConfigurationError("randomk needs a random stream")
        idx = np.sort(rng.choice(d, size=spec.k, replace=False))
        return SparseMessage(d, idx, x[idx])

    idx = np.flatnonzero(x)
    magnitudes = np.abs(x[idx])
    values = np.sign(x[idx]) * _round_down_to_power(magnitudes, spec.base)
    debug(f"rounding kept {idx.size} of {d} coordinates")
    return SparseMessage(d, idx, values)


def payload_bytes(msg, index_bytes=INDEX_BYTES, value_bytes=VALUE_BYTES):
    """Bytes of the entries only; framing headers are not counted."""
    return len(msg) * (index_bytes + value_bytes)
