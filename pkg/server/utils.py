"""
Module Name: utils.py
Description: Contains helpers shared by the round loops: the client fan-out pool, the lock-guarded
             message ledger used to cross-check byte accounting, and fixed-order averaging.
Date: 2026-10-19
"""

import threading
from concurrent import futures

import numpy as np

from configs.config import THREADS, INDEX_BYTES, VALUE_BYTES, debug
from compress.compressors import payload_bytes

# -------------------------
# Fixed-order reductions
# -------------------------

def ordered_mean(vectors):
    """Mean of a sequence of vectors, summed in the given order."""
    vectors = list(vectors)
    acc = np.zeros_like(np.asarray(vectors[0], dtype=np.float64))
    for vec in vectors:
        acc += vec
    return acc / len(vectors)

# -------------------------
# Client fan-out
# -------------------------

class ClientPool:
    """
    Runs one callable per client. Results always come back in client-index order, so the outcome
    does not depend on how many workers run or in which order they finish.
    """

    def __init__(self, workers=None):
        self.workers = THREADS if workers is None else max(1, int(workers))
        self._executor = None

    def __enter__(self):
        if self.workers > 1:
            self._executor = futures.ThreadPoolExecutor(max_workers=self.workers)
            debug(f"client pool started with {self.workers} workers")
        return self

    def __exit__(self, exc_type, exc, tb):
        if self._executor is not None:
            self._executor.shutdown(wait=True)
            self._executor = None

    def map(self, fn, n):
        if self._executor is None:
            return [fn(i) for i in range(n)]
        return list(self._executor.map(fn, range(n)))

# -------------------------
# Message ledger
# -------------------------

class MessageLedger:
    """
    Independent counter of every message handed to the wire. Client threads record into it
    concurrently, so updates are guarded by a lock.
    """

    def __init__(self, index_bytes=INDEX_BYTES, value_bytes=VALUE_BYTES):
        self.index_bytes = index_bytes
        self.value_bytes = value_bytes
        self.messages = 0
        self.total_bytes = 0
        self.per_client = {}
        self._lock = threading.Lock()

    def record(self, client, msg):
        size = payload_bytes(msg, self.index_bytes, self.value_bytes)
        with self._lock:
            self.messages += 1
            self.total_bytes += size
            self.per_client[client] = self.per_client.get(client, 0) + size

    def record_dense(self, client, d):
        size = d * self.value_bytes
        with self._lock:
            self.messages += 1
            self.total_bytes += size
            self.per_client[client] = self.per_client.get(client, 0) + size
