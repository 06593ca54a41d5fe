"""Deterministic random-stream derivation for reproducible experiments."""

import numpy as np

# Stream purposes. Each purpose id is the first component of a spawn key so
# that any (trial, user, subframe) realization can be re-drawn in isolation,
# independent of execution order or worker parallelism.
POPULATION = 0
CODEBOOK = 1
ACTIVE_SET = 2
NLOS = 3
NOISE_PILOT = 4
NOISE_DATA = 5
DATA_SYMBOLS = 6


def stream(seed, *path):
    """Return an independent generator for the key (seed, *path).

    The same key always yields the same stream regardless of which other
    streams have been consumed, which makes trials safe to run concurrently.
    """
    key = tuple(int(p) for p in path)
    return np.random.default_rng(np.random.SeedSequence(int(seed), spawn_key=key))
