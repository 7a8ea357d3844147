"""Deterministic pseudo-random number generator.

The simulation needs a stream that is reproducible bit for bit across the
pure-Python operations and the compiled batch kernels, so the generator is a
hand-rolled splitmix64 whose single 64-bit word of state lives in a one-element
``uint64`` array.  The compiled kernels advance the very same array in place,
which keeps one logical stream no matter which side consumes it.
"""

from __future__ import annotations

import math

import numpy as np

_MASK = (1 << 64) - 1
_GAMMA = 0x9E3779B97F4A7C15
_MIX1 = 0xBF58476D1CE4E5B9
_MIX2 = 0x94D049BB133111EB

# 2**-53: a 53-bit integer scaled by this lands in [0, 1).
_INV53 = 1.0 / 9007199254740992.0

TWO_PI = 2.0 * math.pi


class Rng:
    """splitmix64 stream over a shared one-word state.

    Args:
        seed: initial state, any integer in ``[0, 2**64)``.
    """

    __slots__ = ("state",)

    def __init__(self, seed: int):
        if not 0 <= int(seed) < 1 << 64:
            raise ValueError(f"seed out of range [0, 2**64): {seed!r}")
        self.state = np.array([seed], dtype=np.uint64)

    def next_u64(self) -> int:
        z = (int(self.state[0]) + _GAMMA) & _MASK
        self.state[0] = z
        z = ((z ^ (z >> 30)) * _MIX1) & _MASK
        z = ((z ^ (z >> 27)) * _MIX2) & _MASK
        return z ^ (z >> 31)

    def next_float(self) -> float:
        """Uniform double in [0, 1), built from the top 53 bits."""
        return (self.next_u64() >> 11) * _INV53

    def next_angle(self) -> float:
        """Uniform heading in [0, 2*pi)."""
        return self.next_float() * TWO_PI

    def next_below(self, n: int) -> int:
        """Uniform integer in [0, n) by rejection, so there is no modulo bias."""
        if n <= 0:
            raise ValueError(f"n must be positive: {n!r}")
        # Largest multiple of n that fits in 64 bits.
        limit = (1 << 64) - ((1 << 64) % n)
        while True:
            u = self.next_u64()
            if u < limit:
                return u % n

    def shuffle(self, values: np.ndarray) -> None:
        """In-place Fisher-Yates shuffle of a 1-D array."""
        for i in range(values.size - 1, 0, -1):
            j = self.next_below(i + 1)
            values[i], values[j] = values[j], values[i]

    def clone(self) -> "Rng":
        """Independent copy with identical state."""
        return Rng(int(self.state[0]))

    def __repr__(self) -> str:
        return f"Rng(state={int(self.state[0]):#018x})"
