"""Deterministic 64-bit PRNG and mixing primitives.

Every random choice in the harness (mutation plans, randomized configs)
goes through SplitMix64 so that plans are reproducible across hosts and
languages. The host RNG is never used.
"""

MASK64 = (1 << 64) - 1
_GOLDEN = 0x9E3779B97F4A7C15


def mix64(x: int) -> int:
    """SplitMix64 finalizer: a fixed 64-bit bijective mixing function."""
    z = (x + _GOLDEN) & MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK64
    return z ^ (z >> 31)


class SplitMix64:
    """Seeded deterministic generator built on the mix64 finalizer."""

    def __init__(self, seed: int):
        self._state = seed & MASK64

    def next_u64(self) -> int:
        self._state = (self._state + _GOLDEN) & MASK64
        z = self._state
        z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
        z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK64
        return z ^ (z >> 31)

    def below(self, n: int) -> int:
        """Uniform integer in [0, n). Modulo reduction; bias is negligible
        for n far below 2**64 and the reduction is trivially portable."""
        if n <= 0:
            raise ValueError("n must be positive")
        return self.next_u64() % n

    def sample(self, n: int, k: int) -> list[int]:
        """k distinct integers from [0, n), via partial Fisher-Yates."""
        if not 0 <= k <= n:
            raise ValueError("need 0 <= k <= n")
        pool = list(range(n))
        for i in range(k):
            j = i + self.below(n - i)
            pool[i], pool[j] = pool[j], pool[i]
        return pool[:k]
