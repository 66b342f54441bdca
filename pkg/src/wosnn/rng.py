"""Keyed random streams.

Each stream is a Philox generator whose 128-bit key packs the 64-bit seed in
the low word and the 64-bit stream id in the high word, so distinct ids give
independent counter-based sequences and ``(seed, id)`` pins the sequence.
"""

import numpy as np

_U64 = 1 << 64

# Reserved id for drawing starting points; path streams use ids 0, 1, 2, ...
STARTS_STREAM = _U64 - 1


class RngStream:
    """A reproducible random stream identified by ``(seed, stream_id)``."""

    def __init__(self, seed, stream_id=0):
        seed = int(seed)
        stream_id = int(stream_id)
        if not (0 <= seed < _U64 and 0 <= stream_id < _U64):
            raise ValueError("seed and stream_id must be unsigned 64-bit integers")
        self.seed = seed
        self.stream_id = stream_id
        self.generator = np.random.Generator(np.random.Philox(key=seed | (stream_id << 64)))

    def __repr__(self):
        return f"RngStream(seed={self.seed}, stream_id={self.stream_id})"

    def normal(self, size):
        return self.generator.standard_normal(size)

    def uniform(self, size):
        return self.generator.random(size)


def as_generator(rng):
    """Accept an ``RngStream`` or a numpy ``Generator``."""
    if isinstance(rng, RngStream):
        return rng.generator
    if isinstance(rng, np.random.Generator):
        return rng
    raise TypeError(f"expected RngStream or numpy Generator, got {type(rng).__name__}")


def unit_vectors(normals):
    """Normalize Gaussian vectors along the last axis (uniform directions)."""
    normals = np.asarray(normals, dtype=float)
    sq = normals[..., 0] * normals[..., 0]
    for j in range(1, normals.shape[-1]):
        sq = sq + normals[..., j] * normals[..., j]
    return normals / np.sqrt(sq)[..., None]
