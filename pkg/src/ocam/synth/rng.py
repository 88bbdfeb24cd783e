"""SplitMix64 pseudo-random generator.

The state is a 64-bit integer advanced by the golden-ratio increment; outputs
are finalised with the standard SplitMix64 mixer, so a given seed yields the
same stream in any language with 64-bit unsigned arithmetic.
"""
from __future__ import annotations

import math

_MASK = (1 << 64) - 1
_GOLDEN = 0x9E3779B97F4A7C15


class SplitMix64:
    def __init__(self, seed: int):
        self.state = seed & _MASK

    def next_u64(self) -> int:
        self.state = (self.state + _GOLDEN) & _MASK
        z = self.state
        z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK
        z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK
        return z ^ (z >> 31)

    def random(self) -> float:
        """Uniform double in [0, 1) from the top 53 bits."""
        return (self.next_u64() >> 11) * (1.0 / (1 << 53))

    def uniform(self, lo: float, hi: float) -> float:
        return lo + (hi - lo) * self.random()

    def randbelow(self, n: int) -> int:
        if n <= 0:
            raise ValueError("n must be positive")
        return int(self.random() * n)

    def choice(self, seq):
        return seq[self.randbelow(len(seq))]

    def gauss(self) -> float:
        """Standard normal deviate (Box-Muller, cosine branch)."""
        u1 = 1.0 - self.random()
        u2 = self.random()
        return math.sqrt(-2.0 * math.log(u1)) * math.cos(2.0 * math.pi * u2)

    def poisson(self, lam: float) -> int:
        if lam < 0:
            raise ValueError("rate must be non-negative")
        if lam == 0:
            return 0
        if lam > 50:
            return max(0, int(round(lam + math.sqrt(lam) * self.gauss())))
        limit, k, prod = math.exp(-lam), 0, self.random()
        while prod > limit:
            k += 1
            prod *= self.random()
        return k

    def hexdigest(self, n_chars: int = 40) -> str:
        out = ""
        while len(out) < n_chars:
            out += f"{self.next_u64():016x}"
        return out[:n_chars]
