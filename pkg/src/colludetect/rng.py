"""Seeded randomness with named, independent substreams.

Every random draw in the package flows from one user-supplied 64-bit seed
through a counter-based Philox generator. Distinct concerns pull from
distinct substreams so that, for example, adding one more weight draw in
the simulator cannot shift the k-means initialization. Substreams are
addressed by integer paths:

    TOPOLOGY  - simulator edge-existence draws
    WEIGHTS   - simulator edge-weight draws
    SHUFFLE   - simulator vertex relabeling
    KMEANS    - k-means initialization; extended by k so every cluster
                count sees an independent stream derived from (seed, k)

Runs are reproducible bit-for-bit on the same build for a fixed seed.
"""

from __future__ import annotations

import numpy as np

TOPOLOGY = 0
WEIGHTS = 1
SHUFFLE = 2
KMEANS = 3

_MASK64 = (1 << 64) - 1


def seed_sequence(seed: int, *path: int) -> np.random.SeedSequence:
    """SeedSequence for the substream addressed by ``path`` under ``seed``."""
    return np.random.SeedSequence(entropy=int(seed) & _MASK64, spawn_key=tuple(path))


def generator(seed: int, *path: int) -> np.random.Generator:
    """Philox generator on the (seed, path) substream."""
    return np.random.Generator(np.random.Philox(seed_sequence(seed, *path)))


def derive_seed(seed: int, *path: int) -> int:
    """A 64-bit seed deterministically derived from (seed, path)."""
    return int(seed_sequence(seed, *path).generate_state(1, np.uint64)[0])


def random_seed() -> int:
    """Fresh 64-bit seed from OS entropy (used when the user gives none)."""
    return int(np.random.SeedSequence().entropy) & _MASK64


def open_unit(rng: np.random.Generator, size: int) -> np.ndarray:
    """Uniform draws in the open interval (0, 1).

    ``Generator.random`` samples [0, 1); exact zeros are redrawn so callers
    can scale the result into (0, b] without producing zero weights.
    """
    u = rng.random(size)
    while True:
        zero = u == 0.0
        if not zero.any():
            return u
        u[zero] = rng.random(int(zero.sum()))
