"""Seeded 64-bit linear congruential generator.

``state <- (6364136223846793005 * state + 1442695040888963407) mod 2**64``
(Knuth's MMIX constants).  The initial state is the seed reduced mod 2**64.
``next_u32`` returns the top 32 bits of the advanced state;
``randint(lo, hi)`` is ``lo + next_u32() % (hi - lo + 1)``.  The modulo bias
is accepted: the point is that any implementation reproduces the same draws.
"""

from __future__ import annotations

MULTIPLIER = 6364136223846793005
INCREMENT = 1442695040888963407
MASK = (1 << 64) - 1


class LCG:
    def __init__(self, seed: int = 0):
        self.state = seed & MASK

    def next_u64(self) -> int:
        self.state = (MULTIPLIER * self.state + INCREMENT) & MASK
        return self.state

    def next_u32(self) -> int:
        return self.next_u64() >> 32

    def randint(self, lo: int, hi: int) -> int:
        if hi < lo:
            raise ValueError("empty range")
        return lo + self.next_u32() % (hi - lo + 1)

    def choice(self, seq):
        return seq[self.randint(0, len(seq) - 1)]

    def random(self) -> float:
        return self.next_u32() / 4294967296.0
