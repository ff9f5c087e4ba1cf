"""Deterministic 64-bit random stream (splitmix64).

Python's ``random`` module does not guarantee identical sequences across
implementations, so seeded artifacts (prompt noise) use splitmix64 with its
fixed constants. The same seed reproduces the same sentences anywhere.
"""

from __future__ import annotations

from dataclasses import dataclass

_MASK64 = (1 << 64) - 1
_GOLDEN = 0x9E3779B97F4A7C15


@dataclass
class RngStream:
    """A splitmix64 generator; a plain value, cheap to copy, never shared."""

    state: int

    def __post_init__(self) -> None:
        self.state &= _MASK64

    def next_u64(self) -> int:
        self.state = (self.state + _GOLDEN) & _MASK64
        z = self.state
        z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
        z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
        return z ^ (z >> 31)

    def next_below(self, n: int) -> int:
        # Modulo reduction: bias is < 2**-57 for any n below 2**6, far under
        # anything a frequency test can see.
        if n <= 0:
            raise ValueError("n must be positive")
        return self.next_u64() % n

    def copy(self) -> "RngStream":
        return RngStream(self.state)


def class_stream(seed: int, class_index: int) -> RngStream:
    """Per-class substream: splitmix64 seeded with seed XOR class_index.

    Reordering or extending the class list never reshuffles the noise drawn
    for other classes.
    """
    return RngStream((seed ^ class_index) & _MASK64)
