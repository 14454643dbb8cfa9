"""
Platform-independent random streams.

SplitMix64 expands a 64-bit seed into the 256-bit xoshiro256** state. Independent
streams for parallel runs are obtained with the xoshiro jump function: stream k is
the base stream advanced by k * 2**128 draws, so streams never overlap in practice.
All arithmetic is done on Python ints masked to 64 bits, which makes every sequence
identical on every platform.
"""

from typing import List, Tuple

from .errors import UsageError

MASK64 = (1 << 64) - 1
_TWO_POW_53_INV = 1.0 / (1 << 53)

# xoshiro256** jump polynomial (equivalent to 2**128 calls to next_u64)
_JUMP = (0x180EC6D33CFD0ABA, 0xD5A61266F0C9392C, 0xA9582618E03FC9AA, 0x39ABDC4529B1661C)


def splitmix64(state: int) -> Tuple[int, int]:
    """One SplitMix64 step. Returns (new_state, output)."""
    state = (state + 0x9E3779B97F4A7C15) & MASK64
    z = state
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK64
    return state, z ^ (z >> 31)


def _rotl(x: int, k: int) -> int:
    return ((x << k) | (x >> (64 - k))) & MASK64


class RngStream:
    """Deterministic xoshiro256** generator identified by (seed, stream_id)."""

    __slots__ = ("seed", "stream_id", "_s0", "_s1", "_s2", "_s3")

    def __init__(self, seed: int, stream_id: int = 0):
        if stream_id < 0:
            raise UsageError("stream_id must be nonnegative")
        self.seed = seed & MASK64
        self.stream_id = stream_id
        sm = self.seed
        words: List[int] = []
        for _ in range(4):
            sm, out = splitmix64(sm)
            words.append(out)
        if not any(words):
            words[0] = 1  # all-zero state is a fixed point
        self._s0, self._s1, self._s2, self._s3 = words
        for _ in range(stream_id):
            self.jump()

    @property
    def state(self) -> Tuple[int, int, int, int]:
        return (self._s0, self._s1, self._s2, self._s3)

    def next_u64(self) -> int:
        s0, s1, s2, s3 = self._s0, self._s1, self._s2, self._s3
        result = (_rotl((s1 * 5) & MASK64, 7) * 9) & MASK64
        t = (s1 << 17) & MASK64
        s2 ^= s0
        s3 ^= s1
        s1 ^= s2
        s0 ^= s3
        s2 ^= t
        self._s0, self._s1, self._s2, self._s3 = s0, s1, s2, _rotl(s3, 45)
        return result

    def below(self, n: int) -> int:
        """Uniform integer in [0, n) by 64-bit multiply-shift."""
        if n <= 0:
            raise UsageError("n must be positive")
        return (self.next_u64() * n) >> 64

    def uniform(self) -> float:
        """Uniform float in [0, 1) with 53 random bits."""
        return (self.next_u64() >> 11) * _TWO_POW_53_INV

    def jump(self) -> None:
        s0 = s1 = s2 = s3 = 0
        for word in _JUMP:
            for bit in range(64):
                if word & (1 << bit):
                    s0 ^= self._s0
                    s1 ^= self._s1
                    s2 ^= self._s2
                    s3 ^= self._s3
                self.next_u64()
        self._s0, self._s1, self._s2, self._s3 = s0, s1, s2, s3

    def restore(self, state: Tuple[int, int, int, int]) -> None:
        """Continue from a state produced by `state` (or by a compiled stepping loop)."""
        words = tuple(int(w) & MASK64 for w in state)
        if len(words) != 4 or not any(words):
            raise UsageError("state must be four 64-bit words, not all zero")
        self._s0, self._s1, self._s2, self._s3 = words

    def __repr__(self) -> str:
        return f"RngStream(seed={self.seed}, stream_id={self.stream_id})"
