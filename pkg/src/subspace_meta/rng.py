"""Deterministic, path-addressed random number streams.

Every stochastic operation in the package draws from a stream identified
by a master seed plus an integer path (e.g. ``(sweep, task)``).  Streams
with the same (seed, path) produce bitwise-identical draw sequences no
matter where or in which order they are instantiated, which makes full
pipeline runs reproducible and independent of task scheduling.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

__all__ = ["RngStream", "as_generator"]


@dataclass(frozen=True)
class RngStream:
    """A reproducible random stream keyed by (master seed, integer path).

    ``generator()`` always returns a fresh generator positioned at the
    start of the stream, so one stream should feed exactly one logical
    operation; derive children with ``child`` for sub-operations.
    """

    seed: int
    path: tuple[int, ...] = field(default_factory=tuple)

    def __post_init__(self):
        object.__setattr__(self, "path", tuple(int(i) for i in self.path))

    def child(self, *steps: int) -> "RngStream":
        """Derive the sub-stream at ``path + steps``."""
        return RngStream(self.seed, self.path + steps)

    def generator(self) -> np.random.Generator:
        """Fresh generator at the start of this stream."""
        seq = np.random.SeedSequence(self.seed, spawn_key=self.path)
        return np.random.default_rng(seq)


def as_generator(rng) -> np.random.Generator:
    """Coerce an RngStream, Generator, or integer seed to a Generator.

    An RngStream yields a fresh generator (restarting the stream); a
    Generator is passed through and keeps its state.
    """
    if isinstance(rng, RngStream):
        return rng.generator()
    if isinstance(rng, np.random.Generator):
        return rng
    if isinstance(rng, (int, np.integer)):
        return RngStream(int(rng)).generator()
    raise TypeError(f"cannot interpret {type(rng).__name__} as a random stream")
