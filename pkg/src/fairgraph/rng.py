"""Seeded random streams.

Every pipeline stage draws from its own substream, derived from the run seed
with ``numpy.random.SeedSequence(seed, spawn_key=(stage,))`` and fed to a
PCG64 generator.  Stage numbers are fixed constants, so adding a new stage
never perturbs the draws of existing ones.
"""
from __future__ import annotations

import numpy as np

GROUPS = 0
FEATURES = 1
EDGES = 2
SPLITS = 3
REBALANCE = 10
INIT = 20
DROPOUT = 21


def stream(seed: int, stage: int) -> np.random.Generator:
    """Independent generator for ``stage`` of a run seeded with ``seed``."""
    if seed is None:
        raise ValueError("a seed is required for reproducible streams")
    ss = np.random.SeedSequence(int(seed), spawn_key=(int(stage),))
    return np.random.Generator(np.random.PCG64(ss))
