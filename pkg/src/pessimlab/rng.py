"""Counter-based random streams.

Every random draw in the package comes from a Philox generator keyed by a
64-bit seed and a 64-bit stream id. Seeds for (root, N, replication, fold)
cells are derived with a splitmix64 style avalanche so that nearby inputs
give unrelated keys. Nothing here keeps global state.
"""

from __future__ import annotations

import numpy as np

MASK64 = (1 << 64) - 1

# stream ids used across the package
STREAM_DATA = 0
STREAM_FOLDS = 1
STREAM_CODE = 2
STREAM_INSTANCE = 3
STREAM_MC = 4


def _avalanche(x: int) -> int:
    x = (x + 0x9E3779B97F4A7C15) & MASK64
    x = ((x ^ (x >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
    x = ((x ^ (x >> 27)) * 0x94D049BB133111EB) & MASK64
    return x ^ (x >> 31)


def mix_seed(*parts: int) -> int:
    """Fold any number of integers into one 64-bit seed."""
    h = 0x243F6A8885A308D3
    for p in parts:
        h = _avalanche(h ^ (int(p) & MASK64))
    return h


def generator(seed: int, stream: int = STREAM_DATA) -> np.random.Generator:
    """Philox generator keyed by ``(seed, stream)``; the draw index is the counter."""
    key = np.array([int(seed) & MASK64, int(stream) & MASK64], dtype=np.uint64)
    return np.random.Generator(np.random.Philox(key=key))
