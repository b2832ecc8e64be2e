"""Deterministic random-stream derivation.

Every stochastic routine takes an explicit ``numpy.random.Generator``.
Experiments derive one independent generator per (stream, trial) pair from a
single master seed, so results do not depend on execution order or on how
trials are distributed across workers.
"""

from __future__ import annotations

import numpy as np

__all__ = ["substream"]


def substream(master_seed: int, *path: int) -> np.random.Generator:
    """Return the generator for a fixed position in the stream tree.

    The stream is a pure function of ``(master_seed, *path)``: numpy's
    ``SeedSequence`` hashes the integer tuple into independent entropy, so
    ``substream(s, 3, 17)`` yields the same draws whether it is created
    first, last, or in a different process.
    """
    if any(p < 0 for p in path):
        raise ValueError("substream path entries must be non-negative")
    return np.random.default_rng(np.random.SeedSequence([int(master_seed) & (2**64 - 1), *path]))
