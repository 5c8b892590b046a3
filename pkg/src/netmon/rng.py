"""Deterministic random-stream plumbing.

All stochastic routines draw from Philox, a counter-based 64-bit generator
with a portable specification. Independent work items (replications,
bootstrap draws, counties) get their own substream keyed by mixing the user
seed with the item index, so results do not depend on scheduling or thread
count.
"""

from __future__ import annotations

import numpy as np

_MASK64 = (1 << 64) - 1
_GOLDEN = 0x9E3779B97F4A7C15


def _splitmix64(value: int) -> int:
    # Finalizer from the splitmix64 generator; bijective on 64-bit ints.
    value = (value + _GOLDEN) & _MASK64
    value = ((value ^ (value >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    value = ((value ^ (value >> 27)) * 0x94D049BB133111EB) & _MASK64
    return (value ^ (value >> 31)) & _MASK64


def mix(seed: int, index: int) -> int:
    """Collision-resistant 64-bit key for substream `index` under `seed`."""
    return _splitmix64((seed & _MASK64) ^ _splitmix64(index & _MASK64))


def substream(seed: int, index: int) -> np.random.Generator:
    """Generator for an independent substream; stable across platforms."""
    return np.random.Generator(np.random.Philox(key=mix(seed, index)))
