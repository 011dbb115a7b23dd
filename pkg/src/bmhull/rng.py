"""Reproducible, splittable Gaussian streams.

Every stream is addressed by a ``(seed, replicate, lane)`` triple and backed
by a Philox counter-based generator: ``(seed, replicate)`` forms the 128-bit
Philox key and ``lane`` occupies the top word of the 256-bit counter.  No
stream shares state with any other, so replicates can be generated in any
order, on any number of workers, and replay bit for bit.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

_U64 = (1 << 64) - 1
_U32 = (1 << 32) - 1


@dataclass(frozen=True)
class StreamKey:
    seed: int = 0
    replicate: int = 0
    lane: int = 0

    def __post_init__(self):
        if not 0 <= self.seed <= _U64:
            raise ValueError(f"seed must be a 64-bit unsigned integer, got {self.seed}")
        if not 0 <= self.replicate <= _U64:
            raise ValueError(f"replicate must be a 64-bit unsigned integer, got {self.replicate}")
        if not 0 <= self.lane <= _U32:
            raise ValueError(f"lane must be a 32-bit unsigned integer, got {self.lane}")


def derive(key: StreamKey, lane: int) -> StreamKey:
    """Return ``key`` with its lane replaced."""
    return replace(key, lane=lane)


class GaussianStream:
    """Unbounded sequence of standard normal variates for one key.

    Draws are consumed in order; ``take(3)`` followed by ``take(5)`` yields the
    same eight numbers as a single ``take(8)``.
    """

    def __init__(self, key: StreamKey):
        self.key = key
        bitgen = np.random.Philox(key=np.array([key.seed, key.replicate], dtype=np.uint64),
                                  counter=key.lane << 192)
        self._gen = np.random.Generator(bitgen)

    def take(self, count: int) -> np.ndarray:
        return self._gen.standard_normal(count)

    def take_matrix(self, rows: int, cols: int) -> np.ndarray:
        """Next ``rows * cols`` variates laid out row-major."""
        return self._gen.standard_normal((rows, cols))

    def __iter__(self):
        while True:
            yield from self._gen.standard_normal(1024)


def gaussian_stream(key: StreamKey) -> GaussianStream:
    return GaussianStream(key)
