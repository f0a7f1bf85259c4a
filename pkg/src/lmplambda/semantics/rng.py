"""Counter-based random streams.

A stream is identified by ``(seed, stream)``; both are 64-bit unsigned.
Draws come from numpy's Philox generator keyed by the pair, so two streams
with the same identifiers produce the same sequence on every platform and
distinct stream indices give independent sequences.
"""

from __future__ import annotations

import numpy as np

_MASK64 = (1 << 64) - 1
_BUF = 1024
# shift draws off 0 so every uniform lies in the open interval (0, 1)
_HALF_ULP = 2.0 ** -54


def _check_u64(x: int, what: str) -> int:
    x = int(x)
    if not 0 <= x <= _MASK64:
        raise ValueError(f"{what} must be a 64-bit unsigned integer, got {x}")
    return x


class RngStream:
    __slots__ = ("seed", "stream", "_gen", "_buf", "_pos", "drawn")

    def __init__(self, seed: int, stream: int = 0):
        self.seed = _check_u64(seed, "seed")
        self.stream = _check_u64(stream, "stream")
        bitgen = np.random.Philox(key=self.seed | (self.stream << 64))
        self._gen = np.random.Generator(bitgen)
        self._buf = []
        self._pos = 0
        self.drawn = 0

    def uniform(self) -> float:
        if self._pos >= len(self._buf):
            self._buf = (self._gen.random(_BUF) + _HALF_ULP).tolist()
            self._pos = 0
        u = self._buf[self._pos]
        self._pos += 1
        self.drawn += 1
        return u

    def uniforms(self, n: int) -> np.ndarray:
        """``n`` draws as an array; continues the same sequence as
        :meth:`uniform`."""
        out = np.empty(n)
        for i in range(n):
            out[i] = self.uniform()
        return out

    def block(self, n: int) -> np.ndarray:
        """A fresh block of ``n`` uniforms straight from the generator
        (used by the vectorised kernel sampler; not interleaved with
        :meth:`uniform`)."""
        return self._gen.random(n) + _HALF_ULP

    def spawn(self, offset: int) -> "RngStream":
        """An independent stream derived from this one."""
        return RngStream(self.seed, (self.stream + offset) & _MASK64)

    def __repr__(self):
        return f"RngStream(seed={self.seed}, stream={self.stream})"


def mix_stream(*parts: int) -> int:
    """Deterministic 64-bit stream index from a tuple of integers
    (splitmix64 chaining)."""
    h = 0x9E3779B97F4A7C15
    for p in parts:
        h = (h ^ (int(p) & _MASK64)) & _MASK64
        h = (h + 0x9E3779B97F4A7C15) & _MASK64
        z = h
        z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
        z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
        h = z ^ (z >> 31)
    return h
