"""Reproducible randomness.

All experiment randomness derives from one master seed through Philox, a
counter-based generator: stream k of an experiment is keyed by
(master_seed, k), so results do not depend on how work is scheduled
across workers and any stream can be regenerated in isolation.
"""

import numpy as np


def stream(master_seed: int, member: int) -> np.random.Generator:
    """Independent generator for ensemble member `member`."""
    return np.random.Generator(np.random.Philox(key=(master_seed << 20) + member))


def streams(master_seed: int, n: int):
    return [stream(master_seed, k) for k in range(n)]


def bit_words(rng: np.random.Generator, nbits: int) -> np.ndarray:
    """Packed random bits (uint64 words) for the symbolic doubling base.

    The doubling map shifts binary digits, so a float64 orbit dies after
    ~53 iterates.  Long doubling/baker orbits instead consume one fresh
    random bit per step, which reproduces a Lebesgue-generic orbit
    exactly in distribution.
    """
    nwords = (nbits + 63) // 64 + 1
    return rng.integers(0, 2 ** 64, size=nwords, dtype=np.uint64)
