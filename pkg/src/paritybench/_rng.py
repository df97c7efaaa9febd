"""Seeded random streams.

Every random draw in the package comes from a numpy ``Generator`` over the
PCG64 bit generator.  Child streams (one per benchmark repetition) are derived
with ``SeedSequence(master_seed, spawn_key=(index,))``, numpy's documented
hash-based stream splitting, so a repetition's stream depends only on
``(master_seed, index)`` and never on scheduling.
"""

import numpy as np

RNG_NAME = "numpy.PCG64/SeedSequence"


def make_generator(seed: int, *spawn_key: int) -> np.random.Generator:
    if seed is None or int(seed) < 0:
        raise ValueError("seeds must be non-negative integers")
    ss = np.random.SeedSequence(int(seed), spawn_key=tuple(int(k) for k in spawn_key))
    return np.random.Generator(np.random.PCG64(ss))
