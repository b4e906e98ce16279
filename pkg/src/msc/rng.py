"""SplitMix64 pseudo-random stream.

Chosen because the whole algorithm fits in a few lines and can be reproduced
bit-for-bit in any language::

    state += 0x9E3779B97F4A7C15                         (mod 2**64)
    z = state
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9            (mod 2**64)
    z = (z ^ (z >> 27)) * 0x94D049BB133111EB            (mod 2**64)
    return z ^ (z >> 31)

Floats in [0, 1) take the top 53 bits: ``(next_u64() >> 11) * 2**-53``.
``uniform(lo, hi)`` is ``lo + (hi - lo) * random()``. ``randint(lo, hi)``
(inclusive) is ``lo + floor(random() * (hi - lo + 1))``.
"""

from __future__ import annotations

_MASK = (1 << 64) - 1


class SplitMix64:
    def __init__(self, seed: int):
        self.state = int(seed) & _MASK

    def next_u64(self) -> int:
        self.state = (self.state + 0x9E3779B97F4A7C15) & _MASK
        z = self.state
        z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK
        z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK
        return z ^ (z >> 31)

    def random(self) -> float:
        return (self.next_u64() >> 11) * (1.0 / (1 << 53))

    def uniform(self, lo: float, hi: float) -> float:
        return lo + (hi - lo) * self.random()

    def randint(self, lo: int, hi: int) -> int:
        return lo + int(self.random() * (hi - lo + 1))

    def uniform_array(self, lo: float, hi: float, count: int) -> list[float]:
        return [self.uniform(lo, hi) for _ in range(count)]

    def spawn(self) -> "SplitMix64":
        """Independent child stream seeded from this one."""
        return SplitMix64(self.next_u64())
