"""Deterministic sampling on a fixed, fully specified PRNG.

Sampling results are part of the package's observable behaviour (golden
sample files, reproducible annotation batches), so the generator cannot
be an implementation detail of whatever standard library happens to be
installed.  The algorithm below is frozen; reimplementations in any
language must reproduce it bit for bit.

Generator: SplitMix64.  State is a 64-bit integer; every draw advances
the state by the odd constant 0x9E3779B97F4A7C15 and mixes the result:

    state = (state + 0x9E3779B97F4A7C15) mod 2**64
    z = state
    z = ((z XOR (z >> 30)) * 0xBF58476D1CE4E5B9) mod 2**64
    z = ((z XOR (z >> 27)) * 0x94D049BB133111EB) mod 2**64
    output = z XOR (z >> 31)

Bounded draws use the multiply-shift reduction

    below(bound) = (next64() * bound) >> 64

which maps the 64-bit output into [0, bound).  Its bias is under
bound / 2**64, irrelevant at corpus scale; what matters is that the
mapping never changes.

Sampling without replacement is a partial Fisher-Yates shuffle over
item positions:

    idx = [0, 1, ..., m - 1]
    for i in 0 .. n - 1:
        j = i + below(m - i)
        swap idx[i], idx[j]
    result = idx[0 .. n - 1]
"""

from __future__ import annotations

_MASK64 = (1 << 64) - 1
_GAMMA = 0x9E3779B97F4A7C15
_MIX1 = 0xBF58476D1CE4E5B9
_MIX2 = 0x94D049BB133111EB


class SplitMix64:
    """SplitMix64 stream seeded with a 64-bit integer."""

    def __init__(self, seed: int) -> None:
        self._state = seed & _MASK64

    def next64(self) -> int:
        """Next raw 64-bit output."""
        self._state = (self._state + _GAMMA) & _MASK64
        z = self._state
        z = ((z ^ (z >> 30)) * _MIX1) & _MASK64
        z = ((z ^ (z >> 27)) * _MIX2) & _MASK64
        return z ^ (z >> 31)

    def below(self, bound: int) -> int:
        """Integer in [0, bound) via multiply-shift reduction."""
        if bound <= 0:
            raise ValueError("bound must be positive")
        return (self.next64() * bound) >> 64


def sample_indices(m: int, n: int, seed: int) -> list[int]:
    """First n positions of a partial Fisher-Yates shuffle of range(m).

    Deterministic in (m, n, seed); indices are distinct (sampling
    without replacement).
    """
    if n < 0:
        raise ValueError("sample size must be non-negative")
    if n > m:
        raise ValueError(f"cannot sample {n} items from a pool of {m}")
    rng = SplitMix64(seed)
    idx = list(range(m))
    for i in range(n):
        j = i + rng.below(m - i)
        idx[i], idx[j] = idx[j], idx[i]
    return idx[:n]
