"""Portable 64-bit PRNG: splitmix64 seeding feeding xoshiro256**.

Both generators follow the reference C code by Blackman and Vigna, so
every shuffle and bootstrap draw here is bit-reproducible in any language
that implements the same three primitives (next_u64, below, shuffle).
"""

from __future__ import annotations

from typing import MutableSequence

MASK64 = 0xFFFFFFFFFFFFFFFF


def _rotl(x: int, k: int) -> int:
    return ((x << k) | (x >> (64 - k))) & MASK64


class SplitMix64:
    """Sequential splitmix64; used for seeding and for per-tree seed chains."""

    def __init__(self, seed: int) -> None:
        self.state = seed & MASK64

    def next_u64(self) -> int:
        self.state = (self.state + 0x9E3779B97F4A7C15) & MASK64
        z = self.state
        z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
        z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK64
        return z ^ (z >> 31)


class Xoshiro256:
    """xoshiro256** 1.0 seeded from four consecutive splitmix64 outputs."""

    def __init__(self, seed: int) -> None:
        sm = SplitMix64(seed)
        self.s = [sm.next_u64() for _ in range(4)]

    def next_u64(self) -> int:
        s = self.s
        result = (_rotl((s[1] * 5) & MASK64, 7) * 9) & MASK64
        t = (s[1] << 17) & MASK64
        s[2] ^= s[0]
        s[3] ^= s[1]
        s[1] ^= s[2]
        s[0] ^= s[3]
        s[2] ^= t
        s[3] = _rotl(s[3], 45)
        return result

    def below(self, bound: int) -> int:
        """Uniform integer in [0, bound) by rejection of the biased tail."""
        if bound <= 0:
            raise ValueError(f"bound must be positive, got {bound}")
        # largest multiple of bound that fits in 2**64
        limit = (1 << 64) - ((1 << 64) % bound)
        while True:
            r = self.next_u64()
            if r < limit:
                return r % bound

    def shuffle(self, items: MutableSequence) -> None:
        """In-place Fisher-Yates, walking from the last index down."""
        for i in range(len(items) - 1, 0, -1):
            j = self.below(i + 1)
            items[i], items[j] = items[j], items[i]

    def sample(self, population: int, k: int) -> list[int]:
        """k distinct indices from range(population) via partial Fisher-Yates, sorted."""
        if not 0 <= k <= population:
            raise ValueError(f"cannot draw {k} of {population}")
        pool = list(range(population))
        for i in range(k):
            j = i + self.below(population - i)
            pool[i], pool[j] = pool[j], pool[i]
        return sorted(pool[:k])


def seed_chain(master_seed: int, count: int) -> list[int]:
    """The first `count` splitmix64 outputs from master_seed."""
    sm = SplitMix64(master_seed)
    return [sm.next_u64() for _ in range(count)]
