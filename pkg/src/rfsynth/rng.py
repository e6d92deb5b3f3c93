"""Deterministic 64-bit random streams for dataset generation.

The generator is SplitMix64: the state advances by a fixed odd increment
and every output is a bijective mix of the state.  Both the mix constants
and the draw conventions (uniform scaling, Box-Muller pairing, bounded
integers by modulo) are part of the dataset format contract so that a
port in any language reproduces identical byte streams.  See
docs/FORMAT.md for the normative description.
"""

from __future__ import annotations

import numpy as np

GAMMA = 0x9E3779B97F4A7C15
_MIX1 = 0xBF58476D1CE4E5B9
_MIX2 = 0x94D049BB133111EB
_MASK = 0xFFFFFFFFFFFFFFFF

# 2**-53; a 53-bit mantissa drawn from the top bits of a u64
_INV53 = float(2.0**-53)


def mix64(z: int) -> int:
    """SplitMix64 finalizer: bijective avalanche mix of a 64-bit value."""
    z &= _MASK
    z = ((z ^ (z >> 30)) * _MIX1) & _MASK
    z = ((z ^ (z >> 27)) * _MIX2) & _MASK
    return z ^ (z >> 31)


def example_seed(base_seed: int, index: int) -> int:
    """Per-example seed: the (index+1)-th SplitMix64 output of base_seed.

    Equal to mix64(base_seed + (index+1)*GAMMA) mod 2**64, which lets any
    example be generated without walking the preceding stream.
    """
    return mix64((base_seed + (index + 1) * GAMMA) & _MASK)


class Stream:
    """Stateful SplitMix64 draw stream with vectorized outputs.

    All multi-value draws advance the state by exactly the number of u64
    words consumed, so the draw sequence is reproducible from the seed
    and the documented call order alone.
    """

    __slots__ = ("_state",)

    def __init__(self, seed: int):
        self._state = int(seed) & _MASK

    @property
    def state(self) -> int:
        return self._state

    def u64(self, n: int | None = None):
        """Next raw 64-bit output(s); scalar int if n is None."""
        if n is None:
            self._state = (self._state + GAMMA) & _MASK
            return mix64(self._state)
        steps = np.arange(1, n + 1, dtype=np.uint64) * np.uint64(GAMMA)
        z = steps + np.uint64(self._state)  # wraps mod 2**64
        self._state = (self._state + n * GAMMA) & _MASK
        z ^= z >> np.uint64(30)
        z *= np.uint64(_MIX1)
        z ^= z >> np.uint64(27)
        z *= np.uint64(_MIX2)
        return z ^ (z >> np.uint64(31))

    def uniform(self, lo: float = 0.0, hi: float = 1.0, n: int | None = None):
        """Uniform draw(s) in [lo, hi): lo + (u64 >> 11) * 2**-53 * (hi-lo)."""
        if n is None:
            u = (self.u64() >> 11) * _INV53
            return lo + u * (hi - lo)
        u = (self.u64(n) >> np.uint64(11)).astype(np.float64) * _INV53
        return lo + u * (hi - lo)

    def randint(self, lo: int, hi: int, n: int | None = None):
        """Uniform integer(s) in the inclusive range [lo, hi], by modulo."""
        span = hi - lo + 1
        if span <= 0:
            raise ValueError(f"empty integer range [{lo}, {hi}]")
        if n is None:
            return lo + self.u64() % span
        return (lo + self.u64(n) % np.uint64(span)).astype(np.int64)

    def bits(self, n: int) -> np.ndarray:
        """n random bits, one per u64 draw (its least significant bit)."""
        return (self.u64(n) & np.uint64(1)).astype(np.uint8)

    def normal(self, n: int) -> np.ndarray:
        """n standard normals via Box-Muller.

        Consumes 2*ceil(n/2) u64 words: first ceil(n/2) for the radius
        uniforms (mapped into (0, 1]), then ceil(n/2) for the angles.
        Outputs interleave cosine then sine per pair.
        """
        m = (n + 1) // 2
        u1 = ((self.u64(m) >> np.uint64(11)).astype(np.float64) + 1.0) * _INV53
        u2 = (self.u64(m) >> np.uint64(11)).astype(np.float64) * _INV53
        r = np.sqrt(-2.0 * np.log(u1))
        ang = 2.0 * np.pi * u2
        out = np.empty(2 * m)
        out[0::2] = r * np.cos(ang)
        out[1::2] = r * np.sin(ang)
        return out[:n]
