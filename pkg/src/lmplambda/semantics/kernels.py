"""Composable kernels between real vector spaces, sampled in batches.

A kernel ``k => p`` maps an ``(N, k)`` array of inputs to an ``(N, p)``
array of outputs together with an ``alive`` mask (rows whose mass was
dropped by a guard). Draws are taken from a :class:`DrawSource` one column
per ``LebesgueDraw`` node, in left-to-right evaluation order, so sampling
``Compose(g, f)`` is the same as sampling ``f`` and then ``g`` on the same
source.
"""

from __future__ import annotations

from typing import Tuple

import numpy as np

from ..syntax.prims import PrimRegistry
from .rng import RngStream


class DrawSource:
    def column(self, n: int) -> np.ndarray:
        raise NotImplementedError


class RngDraws(DrawSource):
    def __init__(self, rng: RngStream):
        self.rng = rng

    def column(self, n: int) -> np.ndarray:
        return self.rng.block(n)


class GridDraws(DrawSource):
    """Columns enumerating the midpoint grid ``{(i + 1/2) / m}^D`` in
    lexicographic order (first draw most significant)."""

    def __init__(self, m: int, draws: int):
        self.m = m
        self.draws = draws
        self.n = m ** draws
        self._next = 0

    def column(self, n: int) -> np.ndarray:
        if n != self.n:
            raise ValueError(f"grid source has {self.n} rows, asked for {n}")
        j = self._next
        if j >= self.draws:
            raise ValueError("grid source exhausted")
        self._next += 1
        stride = self.m ** (self.draws - 1 - j)
        idx = (np.arange(n) // stride) % self.m
        return (idx + 0.5) / self.m


class RealKernel:
    k: int
    p: int

    def sample(self, x: np.ndarray, src: DrawSource) -> Tuple[np.ndarray, np.ndarray]:
        raise NotImplementedError

    def draws(self) -> int:
        return 0

    def prims(self):
        return []

    @property
    def feller(self) -> bool:
        """Whether every lifted primitive is continuous and no guard drops
        mass; such kernels are Feller continuous by composition."""
        return all(p.continuous for p in self.prims()) and not self.has_guard()

    def has_guard(self) -> bool:
        return False

    def __call__(self, x, src):
        return self.sample(x, src)


def _alive(n: int) -> np.ndarray:
    return np.ones(n, dtype=bool)


class Identity(RealKernel):
    def __init__(self, k: int):
        self.k = self.p = k

    def sample(self, x, src):
        return x, _alive(len(x))

    def __repr__(self):
        return f"Identity({self.k})"


class LebesgueDraw(RealKernel):
    k = 0
    p = 1

    def sample(self, x, src):
        n = len(x)
        return src.column(n).reshape(n, 1), _alive(n)

    def draws(self):
        return 1

    def __repr__(self):
        return "LebesgueDraw"


class PrimLift(RealKernel):
    def __init__(self, name: str, registry: PrimRegistry):
        self.prim = registry.get(name)
        if self.prim.boolean:
            raise ValueError(f"{name!r} is a boolean test, not a real function")
        self.name = name
        self.k = self.prim.arity
        self.p = 1

    def sample(self, x, src):
        cols = [x[:, i] for i in range(self.k)]
        y = np.asarray(self.prim.vector(*cols), dtype=float)
        y = np.broadcast_to(y, (len(x),)).reshape(len(x), 1)
        return y, _alive(len(x))

    def prims(self):
        return [self.prim]

    def __repr__(self):
        return f"PrimLift({self.name})"


class Reindex(RealKernel):
    """Deterministic coordinate map: output ``i`` is input ``index[i]``
    (duplication and projection allowed)."""

    def __init__(self, k: int, index):
        self.k = k
        self.index = tuple(int(i) for i in index)
        if any(i < 0 or i >= k for i in self.index):
            raise ValueError(f"reindex map {self.index} out of range for input size {k}")
        self.p = len(self.index)

    def sample(self, x, src):
        return x[:, list(self.index)], _alive(len(x))

    @property
    def is_identity(self) -> bool:
        return self.index == tuple(range(self.k))

    def __repr__(self):
        return f"Reindex({self.k}, {list(self.index)})"


class Product(RealKernel):
    def __init__(self, f: RealKernel, g: RealKernel):
        self.f, self.g = f, g
        self.k = f.k + g.k
        self.p = f.p + g.p

    def sample(self, x, src):
        y1, a1 = self.f.sample(x[:, :self.f.k], src)
        y2, a2 = self.g.sample(x[:, self.f.k:], src)
        return np.hstack([y1, y2]), a1 & a2

    def draws(self):
        return self.f.draws() + self.g.draws()

    def prims(self):
        return self.f.prims() + self.g.prims()

    def has_guard(self):
        return self.f.has_guard() or self.g.has_guard()

    def __repr__(self):
        return f"Product({self.f!r}, {self.g!r})"


class Compose(RealKernel):
    """``Compose(g, f)`` is ``g`` after ``f``."""

    def __init__(self, g: RealKernel, f: RealKernel):
        if g.k != f.p:
            raise ValueError(f"cannot compose: inner kernel outputs {f.p}, outer expects {g.k}")
        self.g, self.f = g, f
        self.k = f.k
        self.p = g.p

    def sample(self, x, src):
        y, a1 = self.f.sample(x, src)
        z, a2 = self.g.sample(y, src)
        return z, a1 & a2

    def draws(self):
        return self.f.draws() + self.g.draws()

    def prims(self):
        return self.f.prims() + self.g.prims()

    def has_guard(self):
        return self.f.has_guard() or self.g.has_guard()

    def __repr__(self):
        return f"Compose({self.g!r}, {self.f!r})"


class Guard(RealKernel):
    """Full-language extension: keeps the rows where the boolean test on
    the selected inputs has the expected outcome and drops the others."""

    def __init__(self, k: int, name: str, args, expect: bool, registry: PrimRegistry):
        self.prim = registry.get(name)
        if not self.prim.boolean:
            raise ValueError(f"{name!r} is not a boolean test")
        self.name = name
        self.k = self.p = k
        self.args = tuple(args)
        self.expect = bool(expect)

    def sample(self, x, src):
        res = np.asarray(self.prim.vector(*[x[:, i] for i in self.args]), dtype=bool)
        return x, res == self.expect

    def prims(self):
        return [self.prim]

    def has_guard(self):
        return True

    def __repr__(self):
        return f"Guard({self.name}{list(self.args)} == {self.expect})"


def compose(g: RealKernel, f: RealKernel) -> RealKernel:
    """``Compose`` with identity maps simplified away."""
    if isinstance(f, Identity) or (isinstance(f, Reindex) and f.is_identity):
        if f.k == g.k:
            return g
    if isinstance(g, Identity) or (isinstance(g, Reindex) and g.is_identity):
        if g.k == f.p:
            return f
    return Compose(g, f)


def sample_kernel(kernel: RealKernel, reals, n: int, src: DrawSource):
    """Sample ``kernel`` at the fixed input ``reals``, ``n`` times."""
    x = np.tile(np.asarray(reals, dtype=float).reshape(1, -1), (n, 1)) if kernel.k else np.zeros((n, 0))
    return kernel.sample(x, src)
