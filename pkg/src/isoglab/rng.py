"""Seeded xorshift64* generator.

Every randomized routine in the package draws from a ``SeededRng`` so that
transcripts are a pure function of the seed.  The state is initialised by
one splitmix64 step of the seed (so seed 0 is usable), then advanced with

    x ^= x >> 12;  x ^= x << 25;  x ^= x >> 27
    output = (x * 0x2545F4914F6CDD1D) mod 2^64
"""

MASK64 = (1 << 64) - 1
_MULT = 0x2545F4914F6CDD1D


def _splitmix64(z):
    z = (z + 0x9E3779B97F4A7C15) & MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK64
    return z ^ (z >> 31)


class SeededRng:
    def __init__(self, seed: int):
        self.seed = seed
        state = _splitmix64(seed & MASK64)
        self._state = state or 0x9E3779B97F4A7C15

    def next_u64(self) -> int:
        x = self._state
        x ^= x >> 12
        x ^= (x << 25) & MASK64
        x ^= x >> 27
        self._state = x
        return (x * _MULT) & MASK64

    def getrandbits(self, k: int) -> int:
        out, have = 0, 0
        while have < k:
            out = (out << 64) | self.next_u64()
            have += 64
        return out >> (have - k)

    def randbelow(self, n: int) -> int:
        """Uniform integer in [0, n) by rejection sampling."""
        if n <= 0:
            raise ValueError("randbelow needs a positive bound")
        k = n.bit_length()
        while True:
            r = self.getrandbits(k)
            if r < n:
                return r

    def randint(self, lo: int, hi: int) -> int:
        """Uniform integer in [lo, hi] inclusive."""
        return lo + self.randbelow(hi - lo + 1)

    def choice(self, seq):
        return seq[self.randbelow(len(seq))]

    def random(self) -> float:
        return self.getrandbits(53) / (1 << 53)

    def spawn(self, label: int) -> "SeededRng":
        """Independent child stream, deterministic in (parent seed, label)."""
        return SeededRng(_splitmix64((self.seed * 0x100000001B3) ^ label))
