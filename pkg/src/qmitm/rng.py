"""
Seeded splitmix64 stream. Every random choice made by the solvers, the search simulator
and the generators is drawn from one of these, so traces reproduce bit-for-bit.
"""

from __future__ import annotations

from typing import MutableSequence, TypeVar

__all__ = ["SplitMix64", "derive_seed", "MASK64"]

MASK64 = (1 << 64) - 1
_GAMMA = 0x9E3779B97F4A7C15
_MUL1 = 0xBF58476D1CE4E5B9
_MUL2 = 0x94D049BB133111EB

T = TypeVar("T")


def _mix64(z: int) -> int:
    z = ((z ^ (z >> 30)) * _MUL1) & MASK64
    z = ((z ^ (z >> 27)) * _MUL2) & MASK64
    return z ^ (z >> 31)


def derive_seed(seed: int, *keys: int) -> int:
    """
    Derives an independent 64-bit seed from a base seed and a sequence of integer keys
    (sizes, trial numbers, block indices). Used wherever a loop needs one stream per item.
    """
    state = seed & MASK64
    for key in keys:
        state = _mix64((state + _GAMMA * ((key & MASK64) + 1)) & MASK64)
    return state


class SplitMix64:
    """
    splitmix64 generator (Steele, Lea and Flood). State is a single 64-bit word advanced by
    the golden-ratio increment; output is the finalised state.
    """

    def __init__(self, seed: int) -> None:
        self._seed = seed & MASK64
        self._state = self._seed

    @property
    def seed(self) -> int:
        return self._seed

    def next_u64(self) -> int:
        self._state = (self._state + _GAMMA) & MASK64
        return _mix64(self._state)

    def random(self) -> float:
        """Uniform float in [0, 1) built from the top 53 bits of the next output."""
        return (self.next_u64() >> 11) * (1.0 / (1 << 53))

    def randbelow(self, n: int) -> int:
        """
        Uniform integer in [0, n) by rejection, so there is no modulo bias.

        :raises: ValueError: If n < 1.
        """
        if n < 1:
            raise ValueError(f"randbelow needs n >= 1, got {n}")
        if n == 1:
            return 0
        limit = (1 << 64) - ((1 << 64) % n)
        while True:
            r = self.next_u64()
            if r < limit:
                return r % n

    def shuffle(self, items: MutableSequence[T]) -> None:
        """In-place Fisher-Yates shuffle."""
        for i in range(len(items) - 1, 0, -1):
            j = self.randbelow(i + 1)
            items[i], items[j] = items[j], items[i]

    def sample_without_replacement(self, n: int, k: int) -> list[int]:
        """
        k distinct integers from [0, n) in draw order, via a sparse partial Fisher-Yates
        so the cost is O(k) regardless of n.
        """
        if not 0 <= k <= n:
            raise ValueError(f"cannot draw {k} distinct values from a population of {n}")
        swapped: dict[int, int] = {}
        out = []
        for i in range(k):
            j = i + self.randbelow(n - i)
            out.append(swapped.get(j, j))
            swapped[j] = swapped.get(i, i)
        return out
