"""
Module Name: streams.py
Description: Random stream derivation. Streams are keyed by (seed, purpose, round, client) through
             numpy's SeedSequence, so a client's draws never depend on the order in which clients run.
Date: 2026-10-19
"""

import numpy as np

# Stream purposes
NOISE = 1
PERTURBATION = 2
COMPRESSOR = 3
PHI_ESTIMATE = 4
PROBLEM = 5
LANCZOS = 6


def substream(seed, purpose, round_=0, client=0):
    """Independent generator for one (seed, purpose, round, client) key."""
    return np.random.default_rng([int(seed), int(purpose), int(round_), int(client)])
