"""Deterministic random streams derived from a single seed.

Every random consumer pulls from a named sub-stream so one ``--seed`` flag
reproduces a whole run bit for bit.
"""

import numpy as np

_STREAMS = {"init": 0, "sampling": 1, "synth": 2}


def substream(seed: int, name: str) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(_STREAMS[name],)))
