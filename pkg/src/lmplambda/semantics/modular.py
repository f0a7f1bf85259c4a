"""Modular semantics of pre-terms.

The semantics of a pre-term with ``k`` holes is a finite weighted family of
entries ``(W, f)`` where ``W`` is a pre-value with ``l`` holes and ``f`` a
kernel ``R^k => R^l``. Filling ``W`` with a draw of ``f(r)`` and mixing the
entries by weight gives the output measure of the filled term.

In the continuous fragment control flow never depends on reals, so the
family has at most one entry. For the full language boolean tests are
supported as an extension: both outcomes become entries whose kernels end
with a :class:`Guard` that drops the rows where the test went the other way.

Fuel is charged exactly as in the direct evaluator (a primitive and an
``unfold`` of a ``fold`` both need two units), so that the two semantics
agree at every fixed fuel.
"""

from __future__ import annotations

import sys
from dataclasses import dataclass
from typing import List

import numpy as np

from ..syntax.parser import FALSE, TRUE
from ..syntax.preterm import PreTerm, fill, renumber, shift_holes
from ..syntax.prims import CONTINUOUS, PrimRegistry, registry_for
from ..syntax.terms import (
    App, Case, Fold, Hole, Inj, Lam, Let, PrimB, PrimC, RealLit, Sample, Unfold, Val, Var, show,
    substitute,
)
from ..syntax.typing import typecheck
from .evaluator import to_runtime
from .kernels import (
    Compose, DrawSource, Guard, GridDraws, Identity, LebesgueDraw, PrimLift, Product, RealKernel,
    Reindex, compose,
)
from .measure import ValueMeasure
from .rng import RngStream

MAX_ENTRIES = 4096


@dataclass(frozen=True)
class ModularEntry:
    prevalue: object  # value skeleton with canonical holes 1..l
    kernel: RealKernel
    weight: float

    @property
    def holes(self) -> int:
        return self.kernel.p

    def __str__(self):
        return f"{show(self.prevalue)} <- {self.kernel!r} : {self.weight}"


@dataclass(frozen=True)
class ModularDistribution:
    input_holes: int
    entries: tuple

    @property
    def total_weight(self) -> float:
        return float(sum(e.weight for e in self.entries))

    def __len__(self):
        return len(self.entries)

    def __iter__(self):
        return iter(self.entries)


def _count_holes(x) -> int:
    _, src = renumber(x)
    return len(src)


class _Modular:
    def __init__(self, registry: PrimRegistry):
        self.reg = registry

    def run(self, m, k: int, n: int) -> List[ModularEntry]:
        """Entries for pre-term ``m`` with canonical holes ``1..k`` at fuel
        ``n``."""
        if n <= 0:
            return []
        if isinstance(m, Val) or isinstance(m, (Var, RealLit, Inj, Lam, Fold, Hole)):
            v = m.value if isinstance(m, Val) else m
            return [ModularEntry(v, Identity(k), 1.0)]
        if isinstance(m, Sample):
            return [ModularEntry(Hole(1), LebesgueDraw(), 1.0)]
        if isinstance(m, PrimC):
            if n < 2:
                return []
            idx = [self._hole_index(a) for a in m.args]
            f = compose(PrimLift(m.name, self.reg), Reindex(k, idx))
            return [ModularEntry(Hole(1), f, 1.0)]
        if isinstance(m, PrimB):
            if n < 2:
                return []
            idx = [self._hole_index(a) for a in m.args]
            out = []
            for value, expect in ((FALSE, False), (TRUE, True)):
                g = Guard(k, m.name, idx, expect, self.reg)
                out.append(ModularEntry(value, Compose(Reindex(k, ()), g), 1.0))
            return out
        if isinstance(m, Unfold):
            if not isinstance(m.value, Fold):
                raise ValueError(f"unfold of a non-fold value: {show(m)}")
            return self.run(Val(m.value.value), k, n - 1)
        if isinstance(m, App):
            if not isinstance(m.fun, Lam):
                raise ValueError(f"application of a non-abstraction: {show(m)}")
            return self._after(substitute(m.fun.body, m.fun.var, m.arg), k, n - 1)
        if isinstance(m, Case):
            s = m.scrutinee
            if not isinstance(s, Inj):
                raise ValueError(f"case on a non-injection: {show(m)}")
            x, body = m.branch(s.tag)
            return self._after(substitute(body, x, s.value), k, n - 1)
        if isinstance(m, Let):
            return self._let(m, k, n)
        raise ValueError(f"not a closed pre-term: {m!r}")

    @staticmethod
    def _hole_index(a) -> int:
        if not isinstance(a, Hole):
            raise ValueError("primitive argument is not a hole; is the pre-term closed?")
        return a.index - 1

    def _after(self, labelled, k: int, n: int) -> List[ModularEntry]:
        """Renumber a substituted pre-term and precompose the reindexing."""
        body, sources = renumber(labelled)
        phi = Reindex(k, [s - 1 for s in sources])
        out = []
        for e in self.run(body, len(sources), n):
            out.append(ModularEntry(e.prevalue, compose(e.kernel, phi), e.weight))
        return out

    def _let(self, m: Let, k: int, n: int) -> List[ModularEntry]:
        p1 = _count_holes(m.bound)
        p2 = k - p1
        out = []
        for e1 in self.run(m.bound, p1, n - 1):
            l1 = e1.kernel.p
            body = shift_holes(m.body, l1 - p1)
            labelled = substitute(body, m.var, e1.prevalue)
            body2, sources = renumber(labelled)
            phi = Reindex(l1 + p2, [s - 1 for s in sources])
            pre = compose(phi, Product(e1.kernel, Identity(p2)) if p2 else e1.kernel)
            for e2 in self.run(body2, len(sources), n - 1):
                out.append(ModularEntry(e2.prevalue, compose(e2.kernel, pre), e1.weight * e2.weight))
                if len(out) > MAX_ENTRIES:
                    raise RuntimeError("modular semantics has too many entries")
        return out


def modular_eval(pre: PreTerm, fuel: int, mode: str = CONTINUOUS, registry=None) -> ModularDistribution:
    """Modular semantics of ``pre`` at step index ``fuel``."""
    reg = registry or registry_for(mode)
    old = sys.getrecursionlimit()
    want = 4 * int(fuel) + 2000
    if want > old:
        sys.setrecursionlimit(want)
    try:
        entries = _Modular(reg).run(pre.skeleton, pre.hole_count, int(fuel))
    finally:
        sys.setrecursionlimit(old)
    return ModularDistribution(pre.hole_count, tuple(entries))


class SharedColumns(DrawSource):
    """Position-aligned draws shared by all entries: the ``j``-th draw of
    every entry on row ``i`` is the same uniform. Entries are the control
    paths of the program, and paths agree on their draws up to the test
    where they split, so each row is kept by at most one entry exactly as
    in a direct run on that row's draw sequence."""

    def __init__(self, make_column):
        self._make = make_column
        self._cols = []

    def cursor(self) -> DrawSource:
        shared = self

        class _Cursor(DrawSource):
            def __init__(self):
                self.j = 0

            def column(self, n):
                while len(shared._cols) <= self.j:
                    shared._cols.append(shared._make(len(shared._cols), n))
                col = shared._cols[self.j]
                if len(col) != n:
                    raise ValueError("row count changed between entries")
                self.j += 1
                return col

        return _Cursor()


def _values_of(prevalue, rows: np.ndarray, registry) -> list:
    if isinstance(prevalue, Hole):
        return [float(x) for x in rows[:, prevalue.index - 1]]
    skel = PreTerm(prevalue, rows.shape[1])
    return [to_runtime(fill(skel, row), registry) for row in rows]


def _sample_entries(dist: ModularDistribution, reals, n: int, shared: SharedColumns, registry):
    reals = np.asarray(reals, dtype=float)
    if len(reals) != dist.input_holes:
        raise ValueError(f"pre-term has {dist.input_holes} holes, got {len(reals)} reals")
    vals = []
    for e in dist.entries:
        if e.weight != 1.0:
            raise ValueError("entry weights other than 1 do not arise from the clauses")
        x = np.tile(reals.reshape(1, -1), (n, 1)) if len(reals) else np.zeros((n, 0))
        y, alive = e.kernel.sample(x, shared.cursor())
        vals.extend(_values_of(e.prevalue, y[alive], registry))
    return vals


def modular_reconstruct(pre: PreTerm, reals, fuel: int, samples: int, seed: int,
                        mode: str = CONTINUOUS, registry=None, dist=None) -> ValueMeasure:
    """Output measure of ``fill(pre, reals)`` computed from the modular
    semantics of ``pre``: each entry's kernel is sampled at ``reals`` and its
    pre-value filled with the result."""
    reg = registry or registry_for(mode)
    if dist is None:
        dist = modular_eval(pre, fuel, registry=reg)
    ty = typecheck(None, fill(pre, reals), registry=reg)
    rng = RngStream(seed, 0)
    shared = SharedColumns(lambda j, n: rng.block(n))
    vals = _sample_entries(dist, reals, samples, shared, reg)
    return ValueMeasure(ty, samples, vals)


def modular_grid(pre: PreTerm, reals, fuel: int, m: int, mode: str = CONTINUOUS, registry=None,
                 dist=None) -> ValueMeasure:
    """Exact midpoint-grid version of :func:`modular_reconstruct`: the
    draws are enumerated on ``m`` points per coordinate."""
    reg = registry or registry_for(mode)
    if dist is None:
        dist = modular_eval(pre, fuel, registry=reg)
    ty = typecheck(None, fill(pre, reals), registry=reg)
    d = max([e.kernel.draws() for e in dist.entries], default=0)
    grid = GridDraws(m, d)
    shared = SharedColumns(lambda j, n: grid.column(n))
    vals = _sample_entries(dist, reals, grid.n, shared, reg)
    return ValueMeasure(ty, 0, vals, [1.0 / grid.n] * len(vals), exact=True)
