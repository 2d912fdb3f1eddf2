"""Deterministic random numbers: xoshiro256++ seeded through splitmix64.

The same algorithm runs inside the compiled kernels on uint64 arrays; this
pure-Python twin produces bit-identical streams, which is what makes the
two sampler paths comparable draw for draw.
"""

from __future__ import annotations

M64 = (1 << 64) - 1
_GOLDEN = 0x9E3779B97F4A7C15


def splitmix64_next(state: int) -> tuple[int, int]:
    state = (state + _GOLDEN) & M64
    z = state
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & M64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & M64
    return state, (z ^ (z >> 31)) & M64


def seed_state(seed: int) -> list[int]:
    """Four-word xoshiro state from one integer seed."""
    s = seed & M64
    out = []
    for _ in range(4):
        s, v = splitmix64_next(s)
        out.append(v)
    if all(v == 0 for v in out):
        out[0] = _GOLDEN
    return out


def chain_seed(seed: int, chain: int) -> int:
    """Independent per-chain stream seeds derived from one master seed."""
    _, v = splitmix64_next((seed ^ ((chain + 1) * _GOLDEN)) & M64)
    return v


def _rotl(x: int, k: int) -> int:
    return ((x << k) | (x >> (64 - k))) & M64


class Xoshiro256PP:
    """xoshiro256++ with the standard output scrambler."""

    __slots__ = ("s",)

    def __init__(self, seed: int):
        self.s = seed_state(seed)

    def next_u64(self) -> int:
        s0, s1, s2, s3 = self.s
        out = (_rotl((s0 + s3) & M64, 23) + s0) & M64
        t = (s1 << 17) & M64
        s2 ^= s0
        s3 ^= s1
        s1 ^= s2
        s0 ^= s3
        s2 ^= t
        s3 = _rotl(s3, 45)
        self.s = [s0, s1, s2, s3]
        return out

    def uniform(self) -> float:
        return (self.next_u64() >> 11) * 2.0 ** -53

    def below(self, n: int) -> int:
        """Uniform integer in [0, n) without modulo bias."""
        if n <= 0:
            raise ValueError("below() needs n >= 1")
        limit = (M64 + 1) - ((M64 + 1) % n)
        while True:
            v = self.next_u64()
            if v < limit:
                return v % n

    def geometric_half(self) -> int:
        """Geometric(1/2) jump size from one draw: 1 + trailing one-bits.

        Integer-only so the compiled kernel's stream matches bit for bit.
        """
        v = self.next_u64()
        k = 1
        while (v & 1) and k < 64:
            v >>= 1
            k += 1
        return k
