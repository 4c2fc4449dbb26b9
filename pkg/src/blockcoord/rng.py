"""Deterministic 64-bit PRNG used for all block sampling.

The generator is xoshiro256** (Blackman/Vigna public reference recurrence),
with the 256-bit state expanded from a single 64-bit seed by splitmix64.
Traces produced from a given seed are therefore reproducible bit-for-bit
across platforms and languages that implement the same recurrence.

Uniform block indices are drawn by rejection sampling on the high bits of
each 64-bit output: the top ``ceil(log2 n)`` bits are kept and the draw is
rejected when the value is >= n.  This is unbiased for every n.
"""

MASK64 = 0xFFFFFFFFFFFFFFFF


def _splitmix64_fill(seed):
    """Expand a 64-bit seed into four 64-bit state words."""
    x = seed & MASK64
    out = []
    for _ in range(4):
        x = (x + 0x9E3779B97F4A7C15) & MASK64
        z = x
        z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
        z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK64
        out.append(z ^ (z >> 31))
    return out


def _rotl(x, k):
    return ((x << k) | (x >> (64 - k))) & MASK64


class Xoshiro256StarStar:
    """xoshiro256** stream seeded from a 64-bit integer."""

    __slots__ = ("s0", "s1", "s2", "s3")

    def __init__(self, seed: int):
        if seed < 0:
            raise ValueError("seed must be a nonnegative 64-bit integer")
        self.s0, self.s1, self.s2, self.s3 = _splitmix64_fill(seed)

    def next_u64(self) -> int:
        s1 = self.s1
        result = (_rotl((s1 * 5) & MASK64, 7) * 9) & MASK64
        t = (s1 << 17) & MASK64
        s2 = self.s2 ^ self.s0
        s3 = self.s3 ^ s1
        self.s1 = s1 ^ s2
        self.s0 = self.s0 ^ s3
        self.s2 = s2 ^ t
        self.s3 = _rotl(s3, 45)
        return result

    def uniform_index(self, n: int) -> int:
        """Uniform draw from {0, ..., n-1} via high-bit rejection sampling."""
        if n < 1:
            raise ValueError("n must be >= 1")
        if n == 1:
            return 0
        bits = (n - 1).bit_length()
        shift = 64 - bits
        while True:
            r = self.next_u64() >> shift
            if r < n:
                return r
