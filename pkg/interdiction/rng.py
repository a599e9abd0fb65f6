"""Seeded random streams.

All randomness in the package comes from here so one ``--seed`` pins every
generated instance and every Monte Carlo estimate.
"""

import numpy as np

PRNG_ALGORITHM = "numpy.PCG64"


def make_rng(seed: int = 0, *stream: int) -> np.random.Generator:
    """Generator for ``seed``, optionally narrowed to an independent substream.

    Substreams use ``SeedSequence`` spawn keys, so stream ``(seed, k)`` is the
    same whether it is created serially or inside a worker process.
    """
    sequence = np.random.SeedSequence(int(seed), spawn_key=tuple(int(s) for s in stream))
    return np.random.Generator(np.random.PCG64(sequence))
