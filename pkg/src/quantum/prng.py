"""
Deterministic PRNG for shot sampling.

xoshiro256** seeded from a 64-bit seed through splitmix64, as published by
Blackman and Vigna. Any implementation following the reference algorithms
reproduces the golden count files bit for bit.
"""

_MASK64 = (1 << 64) - 1
_DOUBLE_UNIT = 1.0 / (1 << 53)


def _rotl(value: int, shift: int) -> int:
    return ((value << shift) | (value >> (64 - shift))) & _MASK64


def splitmix64(state: int):
    """Advance a splitmix64 state; returns ``(new_state, output)``"""
    state = (state + 0x9E3779B97F4A7C15) & _MASK64
    z = state
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
    return state, z ^ (z >> 31)


class Xoshiro256StarStar:
    """xoshiro256** generator"""

    def __init__(self, seed: int):
        if not 0 <= seed <= _MASK64:
            raise ValueError(f"seed must be a 64-bit unsigned integer, got {seed}")
        state = seed
        words = []
        for _ in range(4):
            state, word = splitmix64(state)
            words.append(word)
        self._s = words

    def next_u64(self) -> int:
        s0, s1, s2, s3 = self._s
        result = (_rotl((s1 * 5) & _MASK64, 7) * 9) & _MASK64
        t = (s1 << 17) & _MASK64

        s2 ^= s0
        s3 ^= s1
        s1 ^= s2
        s0 ^= s3
        s2 ^= t
        s3 = _rotl(s3, 45)

        self._s = [s0, s1, s2, s3]
        return result

    def next_double(self) -> float:
        """Uniform double in [0, 1) from the top 53 bits"""
        return (self.next_u64() >> 11) * _DOUBLE_UNIT
