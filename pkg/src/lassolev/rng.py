"""Addressable random streams.

Every random draw in the package comes from a :class:`StreamKey`: a root
seed plus a path of ``(label, index)`` pairs such as
``(("replicate", 3), ("phase1", 17))``.  The key is hashed into a 128-bit
Philox key, so a stream is fixed by its logical position and not by the
order in which workers happen to run.
"""
from __future__ import annotations

import hashlib
import struct
from dataclasses import dataclass, field

import numpy as np


class InvalidParam(ValueError):
    """Raised for an invalid distribution parameter."""


@dataclass(frozen=True)
class StreamKey:
    seed: int
    path: tuple[tuple[str, int], ...] = field(default_factory=tuple)

    def __post_init__(self):
        path = tuple(self.path)
        if not all(isinstance(step, tuple) and len(step) == 2 for step in path):
            raise ValueError(f"path must hold (label, index) pairs, got {self.path!r}")
        object.__setattr__(self, "path", tuple((str(a), int(b)) for a, b in path))

    def derive(self, label: str, index: int = 0) -> "StreamKey":
        return StreamKey(self.seed, self.path + ((str(label), int(index)),))

    def philox_key(self) -> int:
        h = hashlib.blake2b(digest_size=16, person=b"lassolev-stream")
        h.update(struct.pack("<Q", self.seed & 0xFFFFFFFFFFFFFFFF))
        for label, index in self.path:
            raw = label.encode("utf-8")
            h.update(struct.pack("<I", len(raw)))
            h.update(raw)
            h.update(struct.pack("<q", index))
        return int.from_bytes(h.digest(), "little")

    def generator(self) -> np.random.Generator:
        return np.random.Generator(np.random.Philox(key=self.philox_key()))


def derive(parent: StreamKey, label: str, index: int = 0) -> StreamKey:
    return parent.derive(label, index)


def as_generator(rng) -> np.random.Generator:
    """Accept a StreamKey, a Generator or an int seed."""
    if isinstance(rng, np.random.Generator):
        return rng
    if isinstance(rng, StreamKey):
        return rng.generator()
    if isinstance(rng, (int, np.integer)):
        return StreamKey(int(rng)).generator()
    raise TypeError(f"cannot build a generator from {type(rng).__name__}")


def uniform(key: StreamKey, size=None) -> np.ndarray:
    """Draws on [0, 1)."""
    return key.generator().random(size)


def normal(key: StreamKey, size=None, loc: float = 0.0, scale: float = 1.0):
    if scale < 0:
        raise InvalidParam(f"scale must be nonnegative, got {scale}")
    return loc + scale * key.generator().standard_normal(size)


def chisquare(key: StreamKey, df: float, size=None):
    if not df > 0:
        raise InvalidParam(f"df must be positive, got {df}")
    return key.generator().chisquare(df, size)
