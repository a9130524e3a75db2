"""Seeded deterministic randomness for Monte Carlo runs.

The generator is splitmix64 (Steele, Lea, Flood 2014): a 64-bit counter
stream passed through a fixed mixing function.  It is tiny, portable, and
bit-identical across platforms and Python versions, which keeps seeded
experiment output stable.
"""

from __future__ import annotations

from fractions import Fraction

_MASK = (1 << 64) - 1
_GAMMA = 0x9E3779B97F4A7C15


class SplitMix64:
    def __init__(self, seed: int):
        self._state = seed & _MASK

    def next_u64(self) -> int:
        self._state = (self._state + _GAMMA) & _MASK
        z = self._state
        z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK
        z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK
        return z ^ (z >> 31)

    def next_bit(self) -> int:
        return self.next_u64() >> 63

    def next_fraction(self) -> Fraction:
        """Uniform rational in [0, 1) with denominator 2^64."""
        return Fraction(self.next_u64(), 1 << 64)

    def next_below(self, n: int) -> int:
        """Uniform integer in [0, n) via rejection sampling."""
        if n <= 0:
            raise ValueError("n must be positive")
        limit = (1 << 64) - ((1 << 64) % n)
        while True:
            x = self.next_u64()
            if x < limit:
                return x % n

    def choose_weighted(self, weights) -> int:
        """Index drawn proportionally to exact rational weights summing to 1."""
        u = self.next_fraction()
        acc = Fraction(0)
        for k, w in enumerate(weights):
            acc += w
            if u < acc:
                return k
        return len(weights) - 1
