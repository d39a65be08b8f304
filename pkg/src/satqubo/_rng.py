"""Deterministic pseudo-random primitives shared across the package.

Everything random in this package runs on SplitMix64: the state advances by
the golden-ratio increment and each output is a bijective finalizer of the
state, which makes the generator effectively counter-based and trivial to
reimplement in another language.  Reference: Steele, Lea & Flood,
"Fast splittable pseudorandom number generators" (OOPSLA 2014).

Stream layout conventions used by callers:
  * `SplitMix64(seed)` yields the raw sequence for a single consumer.
  * independent sub-streams (per instance, per run, ...) are seeded with
    `derive(master, *indices)`, which hashes the indices into the master
    seed so streams are decorrelated.
"""

from __future__ import annotations

MASK64 = (1 << 64) - 1
_GAMMA = 0x9E3779B97F4A7C15
_MIX1 = 0xBF58476D1CE4E5B9
_MIX2 = 0x94D049BB133111EB

#: 2**-53, scale factor turning the top 53 bits of a draw into [0, 1).
DOUBLE_SCALE = 1.0 / 9007199254740992.0


def mix64(value: int) -> int:
    """SplitMix64 finalizer: bijective avalanche hash of a 64-bit value."""
    z = (value + _GAMMA) & MASK64
    z = ((z ^ (z >> 30)) * _MIX1) & MASK64
    z = ((z ^ (z >> 27)) * _MIX2) & MASK64
    return z ^ (z >> 31)


def derive(master: int, *indices: int) -> int:
    """Derive a decorrelated sub-stream seed from a master seed and indices.

    Folds each index into the running seed through two finalizer rounds;
    equal (master, indices) always map to the same seed.
    """
    h = master & MASK64
    for idx in indices:
        h = mix64(h ^ mix64(idx & MASK64))
    return h


class SplitMix64:
    """Sequential SplitMix64 stream (pure-Python twin of the numba kernels)."""

    __slots__ = ("state",)

    def __init__(self, seed: int):
        self.state = seed & MASK64

    def next_u64(self) -> int:
        self.state = (self.state + _GAMMA) & MASK64
        z = self.state
        z = ((z ^ (z >> 30)) * _MIX1) & MASK64
        z = ((z ^ (z >> 27)) * _MIX2) & MASK64
        return z ^ (z >> 31)

    def next_double(self) -> float:
        """Uniform double in [0, 1) from the top 53 bits of a draw."""
        return (self.next_u64() >> 11) * DOUBLE_SCALE

    def next_below(self, bound: int) -> int:
        """Uniform integer in [0, bound) via floor(u * bound)."""
        return int(self.next_double() * bound)
