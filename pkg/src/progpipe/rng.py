"""Deterministic seed tree.

All randomness in the package flows from a single master seed through
numpy's SeedSequence spawn-key mechanism.  A stream is addressed by a
counter path::

    (repeat, fold, purpose)          e.g. (3, 17, PURPOSE_INNER_CV)

so any single fold of any repeat is reproducible in isolation, and
parallel schedules cannot perturb results: streams are derived, never
shared.
"""

from __future__ import annotations

import numpy as np

# Purpose codes, the last component of a stream path.
PURPOSE_FOLD_SHUFFLE = 0
PURPOSE_INNER_CV = 1
PURPOSE_REFIT = 2
PURPOSE_GENERATE = 3
PURPOSE_PERMUTE = 4


def stream(master_seed: int, *path: int) -> np.random.Generator:
    """Return the PCG64 generator addressed by ``path`` under ``master_seed``."""
    ss = np.random.SeedSequence(entropy=master_seed, spawn_key=tuple(path))
    return np.random.Generator(np.random.PCG64(ss))
