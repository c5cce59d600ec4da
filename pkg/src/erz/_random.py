"""Seeded random streams.

Every random draw in the package comes from a PCG64 generator built from
``SeedSequence(root_seed, spawn_key=key)``.  Distinct keys give statistically
independent streams, so a report depends only on the root seed and the key
layout used by the caller (for example ``(STREAM_TRIALS, trial_index)``).
"""

import numpy as np

STREAM_POINTS = 1
STREAM_TRIALS = 2
STREAM_NETWORKS = 3
STREAM_PARAMS = 4
STREAM_LINES = 5


def stream(seed, *key):
    seq = np.random.SeedSequence(int(seed) & (2**64 - 1), spawn_key=tuple(int(k) for k in key))
    return np.random.Generator(np.random.PCG64(seq))


def randbelow(rng, n):
    """Uniform integer in [0, n); n may exceed the int64 range."""
    if n <= 2**62:
        return int(rng.integers(0, n))
    bits = n.bit_length()
    while True:
        words = rng.integers(0, 2**32, size=(bits + 31) // 32, dtype=np.uint64)
        x = 0
        for w in words:
            x = (x << 32) | int(w)
        x &= (1 << bits) - 1
        if x < n:
            return x
