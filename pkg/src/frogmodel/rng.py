"""Counter-based uniform streams.

Every random draw in the simulator is a pure function of a small tuple of
integers (master seed, frog key, step, lane), so adding or removing frogs
never shifts the numbers any other frog sees.
"""

from __future__ import annotations

import hashlib

MASK64 = (1 << 64) - 1
_INV53 = 1.0 / (1 << 53)

# lanes within one (key, step) counter
LANE_MOVE = 0
LANE_DEATH = 1
LANE_COUNT = 2


def splitmix64(x: int) -> int:
    x = (x + 0x9E3779B97F4A7C15) & MASK64
    x = ((x ^ (x >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
    x = ((x ^ (x >> 27)) * 0x94D049BB133111EB) & MASK64
    return x ^ (x >> 31)


def combine(*parts: int) -> int:
    h = 0x6A09E667F3BCC908
    for p in parts:
        h = splitmix64(h ^ (p & MASK64))
    return h


def label_hash(label) -> int:
    """Stable 64-bit hash of a vertex label (int tuple or str)."""
    if isinstance(label, tuple):
        h = combine(0x7475706C65, len(label))
        for c in label:
            h = splitmix64(h ^ (c & MASK64))
        return h
    if isinstance(label, int):
        return combine(0x696E74, label)
    data = str(label).encode("utf-8")
    return int.from_bytes(hashlib.blake2b(data, digest_size=8).digest(), "little")


def frog_key(seed: int, origin_hash: int, index: int) -> int:
    return combine(seed, origin_hash, index)


def uniform(key: int, counter: int, lane: int = LANE_MOVE) -> float:
    """Uniform in [0, 1) determined by (key, counter, lane)."""
    x = splitmix64(key ^ splitmix64((counter << 2 | lane) & MASK64))
    return (x >> 11) * _INV53
