"""Deterministic 64-bit random number generation.

The sampler exists in two forms (a pure-Python reference and a compiled
kernel) that must walk identical chains from the same seed, so both use this
splitmix64 stream with identical draw conventions:

- ``bounded_int(1)`` returns 0 without consuming a draw;
- ``next_double`` maps a raw draw to (0, 1], never exactly 0;
- rejection sampling (not plain modulo) keeps bounded draws unbiased.
"""

from __future__ import annotations

MASK64 = (1 << 64) - 1
_GAMMA = 0x9E3779B97F4A7C15
_MIX1 = 0xBF58476D1CE4E5B9
_MIX2 = 0x94D049BB133111EB

GENERATOR_NAME = "splitmix64"


def mix64(x: int) -> int:
    """One splitmix64 finalization round (stateless)."""
    x &= MASK64
    x = ((x ^ (x >> 30)) * _MIX1) & MASK64
    x = ((x ^ (x >> 27)) * _MIX2) & MASK64
    return x ^ (x >> 31)


class SplitMix64:
    """Seedable splitmix64 stream over uint64 state."""

    __slots__ = ("state",)
    name = GENERATOR_NAME

    def __init__(self, seed: int):
        self.state = seed & MASK64

    def next_u64(self) -> int:
        self.state = (self.state + _GAMMA) & MASK64
        return mix64(self.state)

    def next_double(self) -> float:
        # 53-bit mantissa, shifted into (0, 1] so log() is always finite.
        return ((self.next_u64() >> 11) + 1) * 2.0**-53

    def bounded_int(self, n: int) -> int:
        """Uniform integer in [0, n). Consumes no draw when n <= 1."""
        if n <= 1:
            if n < 1:
                raise ValueError("bounded_int needs n >= 1")
            return 0
        # rejection threshold t = 2**64 mod n; accept x >= t
        t = ((1 << 64) - n) % n
        while True:
            x = self.next_u64()
            if x >= t:
                return x % n


def derive_seed(master: int, index: int) -> int:
    """Fixed splitting rule for independent chains / realizations."""
    return mix64((master & MASK64) + (index + 1) * _GAMMA)
