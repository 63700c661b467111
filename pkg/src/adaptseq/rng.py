"""SplitMix64 generator and the seed-derivation rules built on it.

The generator is pinned bit-exactly so that content sampling and cohort
simulation reproduce across platforms and implementations:

    state  <- (state + 0x9E3779B97F4A7C15) mod 2**64
    z      <- state
    z      <- (z xor (z >> 30)) * 0xBF58476D1CE4E5B9 mod 2**64
    z      <- (z xor (z >> 27)) * 0x94D049BB133111EB mod 2**64
    output <- z xor (z >> 31)
"""

from __future__ import annotations

import hashlib

MASK64 = (1 << 64) - 1
GAMMA = 0x9E3779B97F4A7C15


def mix64(z: int) -> int:
    z &= MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK64
    return z ^ (z >> 31)


class SplitMix64:
    __slots__ = ("state",)

    def __init__(self, seed: int):
        self.state = seed & MASK64

    def next_u64(self) -> int:
        self.state = (self.state + GAMMA) & MASK64
        return mix64(self.state)

    def below(self, n: int) -> int:
        """Uniform integer in ``[0, n)`` by rejection, without modulo bias.

        Draws ``x`` until ``x < 2**64 - (2**64 mod n)`` and returns ``x mod n``.
        """
        if n <= 0:
            raise ValueError("n must be positive")
        limit = (1 << 64) - ((1 << 64) % n)
        while True:
            x = self.next_u64()
            if x < limit:
                return x % n

    def unit(self) -> float:
        """Float in ``[0, 1)`` from the top 53 bits of one draw."""
        return (self.next_u64() >> 11) * (1.0 / (1 << 53))


def nth_output(seed: int, n: int) -> int:
    """The ``n``-th output (0-based) of ``SplitMix64(seed)``, in O(1)."""
    return mix64((seed + (n + 1) * GAMMA) & MASK64)


def default_plan_seed(student_id: str, session_index: int) -> int:
    """Seed used when a caller plans a session without supplying one.

    First 8 bytes (little-endian) of BLAKE2b over ``"<student_id>:<session_index>"``.
    """
    digest = hashlib.blake2b(f"{student_id}:{session_index}".encode("utf-8"), digest_size=8)
    return int.from_bytes(digest.digest(), "little")
