"""Named derivation of random streams from a single top-level seed.

Every consumer asks for a stream by (seed, *names); adding a new consumer
with a fresh name never perturbs existing streams.
"""

import zlib

import numpy as np


def derive_rng(seed: int, *names) -> np.random.Generator:
    """Return a Generator for the stream named by ``names`` under ``seed``.

    Names may be strings or ints; they are hashed into a spawn key, so the
    stream depends only on (seed, names), not on creation order.
    """
    key = tuple(zlib.crc32(str(n).encode("utf-8")) for n in names)
    return np.random.default_rng(np.random.SeedSequence(entropy=seed, spawn_key=key))
