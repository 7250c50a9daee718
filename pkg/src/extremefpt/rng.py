"""Counter-based random streams for reproducible parallel campaigns."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

_MASK64 = (1 << 64) - 1


@dataclass(frozen=True)
class RngStream:
    """A (seed, stream) pair keying an independent Philox stream.

    Philox is counter-based, so distinct keys yield provably
    independent sequences: replicas drawn from (seed, replica_id) can
    run in any order, on any worker, with identical results.
    """

    seed: int
    stream: int = 0

    def generator(self) -> np.random.Generator:
        key = np.array([self.seed & _MASK64, self.stream & _MASK64], dtype=np.uint64)
        return np.random.Generator(np.random.Philox(key=key))

    def replica(self, index: int) -> "RngStream":
        return RngStream(self.seed, (self.stream + index) & _MASK64)

    def domain(self, tag: int) -> "RngStream":
        """Shift into a disjoint stream block, e.g. oracle vs sampler."""
        return RngStream(self.seed, (self.stream ^ (tag << 48)) & _MASK64)
