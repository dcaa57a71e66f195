"""Counter-based random streams keyed by (master seed, stream index...)."""
from __future__ import annotations

import numpy as np

_MASK64 = (1 << 64) - 1


class RngStream:
    """Deterministic Philox generator for one ``(seed, *index)`` key.

    Two streams built from the same key produce the same sequence no
    matter when or in which process they are created, so Monte Carlo
    replicates can be scheduled freely.

    >>> RngStream(7, 3).generator.integers(10**6) == RngStream(7, 3).generator.integers(10**6)
    True
    """

    __slots__ = ("seed", "index", "generator")

    def __init__(self, seed: int, *index: int):
        self.seed = int(seed)
        self.index = tuple(int(i) for i in index)
        if any(i < 0 for i in self.index):
            raise ValueError("stream indices must be non-negative")
        entropy = [self.seed & _MASK64, *self.index]
        ss = np.random.SeedSequence(entropy)
        self.generator = np.random.Generator(np.random.Philox(ss))

    def child(self, *index: int) -> "RngStream":
        """Independent stream keyed by this key extended with ``index``."""
        return RngStream(self.seed, *self.index, *index)

    def __repr__(self):
        return f"RngStream(seed={self.seed}, index={self.index})"


def as_generator(rng) -> np.random.Generator:
    if isinstance(rng, RngStream):
        return rng.generator
    if isinstance(rng, np.random.Generator):
        return rng
    if rng is None or isinstance(rng, (int, np.integer)):
        return RngStream(0 if rng is None else int(rng)).generator
    raise TypeError(f"cannot make a generator from {type(rng).__name__}")
