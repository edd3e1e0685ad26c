"""Seedable, portable random source for reproducible simulation.

The generator is splitmix64 (Steele, Lea & Flood's 64-bit mixer): a counter
advanced by a fixed odd constant, passed through two xor-multiply-shift mixing
rounds.  The algorithm is fully specified by the constants below, so any
implementation in any language produces the same stream from the same seed;
corpora stamped with ``GENERATOR_ID`` are therefore byte-reproducible.
"""
from __future__ import annotations

from typing import Sequence, TypeVar

GENERATOR_ID = "splitmix64"

_MASK = (1 << 64) - 1
_GAMMA = 0x9E3779B97F4A7C15
_MIX1 = 0xBF58476D1CE4E5B9
_MIX2 = 0x94D049BB133111EB

T = TypeVar("T")


def mix64(value: int) -> int:
    """One splitmix64 finalization round over an arbitrary 64-bit value."""
    z = (value + _GAMMA) & _MASK
    z = ((z ^ (z >> 30)) * _MIX1) & _MASK
    z = ((z ^ (z >> 27)) * _MIX2) & _MASK
    return z ^ (z >> 31)


class SplitMix64:
    """Deterministic stream of 64-bit values from one seed."""

    def __init__(self, seed: int):
        self._state = seed & _MASK
        self._seed = seed & _MASK

    @property
    def seed(self) -> int:
        return self._seed

    def next_u64(self) -> int:
        self._state = (self._state + _GAMMA) & _MASK
        z = self._state
        z = ((z ^ (z >> 30)) * _MIX1) & _MASK
        z = ((z ^ (z >> 27)) * _MIX2) & _MASK
        return z ^ (z >> 31)

    def random(self) -> float:
        """Uniform float in [0, 1) with 53 bits of precision."""
        return (self.next_u64() >> 11) / float(1 << 53)

    def randint(self, low: int, high: int) -> int:
        """Uniform integer in [low, high] (inclusive)."""
        if high < low:
            raise ValueError(f"empty range [{low}, {high}]")
        span = high - low + 1
        return low + self.next_u64() % span

    def choice(self, items: Sequence[T]) -> T:
        if not items:
            raise ValueError("cannot choose from an empty sequence")
        return items[self.next_u64() % len(items)]

    def chance(self, probability: float) -> bool:
        if probability <= 0.0:
            return False
        if probability >= 1.0:
            return True
        return self.random() < probability

    def fork(self, label: int) -> "SplitMix64":
        """Child generator with a seed derived from this seed and a label."""
        return SplitMix64(mix64(self._seed ^ mix64(label)))


def derive_run_seeds(base_seed: int, runs: int) -> list[int]:
    """Deterministic per-run seeds for a batch of simulations."""
    stream = SplitMix64(base_seed)
    return [stream.next_u64() for _ in range(runs)]
