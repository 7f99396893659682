"""Keyed, deterministic random streams.

A :class:`Stream` is a run seed plus a key path. Children are derived by
appending keys, so any component (task, episode, controller iteration,
rollout) gets its own reproducible generator regardless of the order in
which work is scheduled.
"""

import hashlib

import numpy as np


def _key_to_int(part):
    if isinstance(part, (bool, np.bool_)):
        raise TypeError("stream keys must be int or str")
    if isinstance(part, (int, np.integer)):
        if part < 0:
            raise ValueError("integer stream keys must be nonnegative")
        return int(part)
    if isinstance(part, str):
        digest = hashlib.blake2b(part.encode("utf-8"), digest_size=8).digest()
        # strings live in the upper half so they never collide with small ints
        return int.from_bytes(digest, "little") | (1 << 63)
    raise TypeError(f"unsupported stream key {part!r}")


class Stream:
    """Seed + key path; cheap to copy, immutable."""

    __slots__ = ("seed", "key")

    def __init__(self, seed, key=()):
        seed = int(seed)
        if not 0 <= seed < 2**64:
            raise ValueError("seed must be a 64-bit unsigned integer")
        self.seed = seed
        self.key = tuple(key)

    def child(self, *parts):
        return Stream(self.seed, self.key + tuple(_key_to_int(p) for p in parts))

    def generator(self):
        ss = np.random.SeedSequence(entropy=self.seed, spawn_key=self.key)
        return np.random.Generator(np.random.PCG64(ss))

    def __eq__(self, other):
        return isinstance(other, Stream) and (self.seed, self.key) == (other.seed, other.key)

    def __hash__(self):
        return hash((self.seed, self.key))

    def __repr__(self):
        return f"Stream(seed={self.seed}, key={self.key})"
