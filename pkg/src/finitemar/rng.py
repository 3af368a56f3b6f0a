"""SplitMix64, the seeded generator behind every randomized routine.

State transition (all arithmetic mod 2**64)::

    state  <- state + 0x9E3779B97F4A7C15
    z      <- state
    z      <- (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9
    z      <- (z ^ (z >> 27)) * 0x94D049BB133111EB
    output <- z ^ (z >> 31)

Counter-based use: the stream for item ``i`` under seed ``s`` is a fresh
generator seeded with ``mix(s, i)``, the output of a generator in state
``s + i * GOLDEN`` (before its increment). Items can therefore be produced
in any order or in parallel with identical results.

Bounded integers use rejection on whole 64-bit words, so draws are exactly
uniform and identical across platforms.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Sequence

MASK = (1 << 64) - 1
GOLDEN = 0x9E3779B97F4A7C15


def _finalize(z: int) -> int:
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK
    return z ^ (z >> 31)


def mix(seed: int, counter: int) -> int:
    return _finalize((seed + (counter + 1) * GOLDEN) & MASK)


class SplitMix64:
    def __init__(self, seed: int):
        self.state = seed & MASK

    def next_u64(self) -> int:
        self.state = (self.state + GOLDEN) & MASK
        return _finalize(self.state)

    def split(self) -> SplitMix64:
        """An independent child stream; advances this stream by one step."""
        return SplitMix64(self.next_u64())

    def below(self, bound: int) -> int:
        """Uniform integer in ``[0, bound)``; ``bound`` may exceed 2**64."""
        if bound <= 0:
            raise ValueError("bound must be positive")
        words = max(1, (bound.bit_length() + 63) // 64)
        span = 1 << (64 * words)
        limit = span - span % bound
        while True:
            x = 0
            for _ in range(words):
                x = (x << 64) | self.next_u64()
            if x < limit:
                return x % bound

    def randint(self, lo: int, hi: int) -> int:
        """Uniform integer in ``[lo, hi]``."""
        return lo + self.below(hi - lo + 1)

    def choice(self, seq: Sequence):
        return seq[self.below(len(seq))]

    def fraction(self, max_den: int, *, lo: int = 0) -> Fraction:
        """A rational in ``[lo/den, 1]`` with a random denominator ``<= max_den``."""
        den = self.randint(1, max_den)
        return Fraction(self.randint(min(lo, den), den), den)

    def simplex(self, k: int, max_den: int, *, positive: bool = False) -> list[Fraction]:
        """``k`` rationals summing to exactly 1, sharing a denominator ``<= max_den``.

        The composition is drawn by sorting ``k - 1`` uniform cut points.
        With ``positive`` every part is at least ``1/den``.
        """
        if k <= 0:
            raise ValueError("k must be positive")
        lo = k if positive else 1
        den = self.randint(lo, max(lo, max_den))
        slack = den - k if positive else den
        cuts = sorted(self.randint(0, slack) for _ in range(k - 1))
        parts = [b - a for a, b in zip([0] + cuts, cuts + [slack])]
        if positive:
            parts = [p + 1 for p in parts]
        return [Fraction(p, den) for p in parts]
