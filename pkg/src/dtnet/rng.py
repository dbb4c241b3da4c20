"""Seeded random streams.

Every random choice in the package draws from numpy's PCG64 bit generator
seeded through ``numpy.random.SeedSequence``.  Sub-streams (one per tree, per
fold, per concept ...) use the entropy list ``[seed, *keys]`` so that they are
independent of execution order and worker count.
"""
from __future__ import annotations

import numpy as np

GENERATOR = "numpy.random.PCG64 via SeedSequence([seed, *keys])"


def make_rng(seed: int, *keys: int) -> np.random.Generator:
    if seed < 0:
        raise ValueError("seed must be non-negative")
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence([int(seed), *map(int, keys)])))


def derive_seed(seed: int, *keys: int) -> int:
    """A 63-bit integer seed for the sub-stream ``(seed, *keys)``."""
    state = np.random.SeedSequence([int(seed), *map(int, keys)]).generate_state(1, np.uint64)[0]
    return int(state) >> 1
