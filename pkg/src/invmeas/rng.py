"""Reproducible random streams.

Every sampler in the package accepts ``rng`` as either a
:class:`RngHandle`, a :class:`numpy.random.Generator` or a plain integer
seed.  Handles are immutable: two calls with the same handle return the
same draws, and independent streams are derived with :meth:`RngHandle.spawn`.
"""

from dataclasses import dataclass

import numpy as np

__all__ = ["RngHandle", "as_generator"]

_BIT_GENERATORS = {
    "PCG64": np.random.PCG64,
    "PCG64DXSM": np.random.PCG64DXSM,
    "Philox": np.random.Philox,
    "SFC64": np.random.SFC64,
    "MT19937": np.random.MT19937,
}


@dataclass(frozen=True)
class RngHandle:
    """Named bit generator, 64-bit seed and stream index."""

    seed: int
    stream: int = 0
    algorithm: str = "PCG64"
    path: tuple = ()

    def __post_init__(self):
        if self.algorithm not in _BIT_GENERATORS:
            raise ValueError(f"unknown bit generator {self.algorithm!r}")
        if not 0 <= int(self.seed) < 2**64:
            raise ValueError("seed must be a 64-bit unsigned integer")
        if self.stream < 0:
            raise ValueError("stream index must be non-negative")

    def generator(self):
        key = (int(self.stream),) + tuple(int(p) for p in self.path)
        ss = np.random.SeedSequence(int(self.seed), spawn_key=key)
        return np.random.Generator(_BIT_GENERATORS[self.algorithm](ss))

    def spawn(self, index):
        """Independent child stream; children of distinct indices never overlap."""
        return RngHandle(self.seed, self.stream, self.algorithm, self.path + (int(index),))


def as_generator(rng):
    if isinstance(rng, np.random.Generator):
        return rng
    if isinstance(rng, RngHandle):
        return rng.generator()
    if rng is None:
        raise ValueError("an explicit seed or generator is required")
    if isinstance(rng, (int, np.integer)):
        return RngHandle(int(rng)).generator()
    raise TypeError(f"cannot build a generator from {type(rng).__name__}")
