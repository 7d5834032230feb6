"""Deterministic substreams for reproducible, parallel-safe simulation.

Every random quantity in this package is drawn from a counter-based Philox
generator whose key is derived by hashing a 64-bit user seed together with an
integer path (for example the replicate index).  Streams for distinct paths
are independent, and the draw sequence for a given ``(seed, *path)`` is a pure
function of its arguments.  Results are therefore bit-identical no matter how
work is scheduled across workers.
"""

from __future__ import annotations

import numpy as np

__all__ = ["substream"]


def substream(seed: int, *path: int) -> np.random.Generator:
    """Return the generator for the substream addressed by ``(seed, *path)``.

    Parameters
    ----------
    seed : int
        Nonnegative user-facing seed.
    *path : int
        Stream coordinates, e.g. ``substream(seed, b)`` for replicate ``b``
        or ``substream(seed, tag, scenario, run)`` in nested studies.  Each
        coordinate must fit in an unsigned 32-bit integer.
    """
    if seed < 0:
        raise ValueError("seed must be a nonnegative integer")
    ss = np.random.SeedSequence(entropy=seed, spawn_key=tuple(path))
    return np.random.Generator(np.random.Philox(ss))
