"""Deterministic tagged random streams.

Every piece of randomness in the simulator flows from a single root seed
plus a string tag (e.g. "client:3:round:17").  The tag is hashed into a
sub-seed so that distinct tags give independent streams and identical
(root_seed, tag) pairs give bit-identical draws on every platform.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass, field

import numpy as np


def _sub_seed(root_seed: int, tag: str) -> int:
    digest = hashlib.blake2b(
        f"{root_seed}:{tag}".encode("utf-8"), digest_size=16
    ).digest()
    return int.from_bytes(digest, "little")


@dataclass(frozen=True)
class RngStream:
    """A named, reproducible random stream derived from a root seed."""

    root_seed: int
    tag: str
    _seed: int = field(init=False, repr=False)

    def __post_init__(self):
        object.__setattr__(self, "_seed", _sub_seed(self.root_seed, self.tag))

    def generator(self) -> np.random.Generator:
        """Fresh generator; repeated calls restart the stream."""
        return np.random.Generator(np.random.PCG64(self._seed))

    def child(self, suffix: str) -> "RngStream":
        return RngStream(self.root_seed, f"{self.tag}:{suffix}")


def derive_stream(root_seed: int, tag: str) -> RngStream:
    """Deterministic sub-stream for (root_seed, tag)."""
    return RngStream(root_seed, tag)
