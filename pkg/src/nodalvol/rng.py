"""Reproducible random streams.

All Monte Carlo in the package draws from Philox (a counter-based
generator) keyed by (seed, task index), so independent tasks get
independent streams and every result is bit-reproducible for a given
seed and task layout.
"""

from __future__ import annotations

import numpy as np

GENERATOR_NAME = "philox-4x64"


def stream(seed: int, task: int = 0) -> np.random.Generator:
    """Independent generator for the given (seed, task) pair."""
    if seed < 0 or task < 0:
        raise ValueError("seed and task must be non-negative")
    return np.random.Generator(np.random.Philox(key=(int(seed) << 32) | int(task)))
