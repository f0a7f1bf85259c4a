"""Pre-terms: term skeletons whose real literals are replaced by numbered
holes, and the factorization ``term = P[r]``."""

from __future__ import annotations

from dataclasses import dataclass
from typing import List, Sequence, Tuple

import numpy as np

from .terms import (
    App, Case, CtxHole, Fold, Hole, Inj, Lam, Let, PrimB, PrimC, RealLit, Sample,
    Unfold, Val, Var, show,
)


@dataclass(frozen=True)
class PreTerm:
    skeleton: object  # a Term or Value built with Hole nodes and no RealLit
    hole_count: int

    def __str__(self) -> str:
        return show(self.skeleton)



def _map_reals(x, on_real, on_hole):
    """Rebuild ``x`` replacing each RealLit / Hole via the callbacks, visiting
    them in left-to-right reading order."""

    def go(n):
        if isinstance(n, RealLit):
            return on_real(n)
        if isinstance(n, Hole):
            return on_hole(n)
        if isinstance(n, (Var, Sample, CtxHole)):
            return n
        if isinstance(n, Inj):
            return Inj(n.tag, go(n.value), n.type)
        if isinstance(n, Fold):
            return Fold(go(n.value), n.type)
        if isinstance(n, Lam):
            return Lam(n.var, n.var_type, go(n.body))
        if isinstance(n, Val):
            return Val(go(n.value))
        if isinstance(n, Unfold):
            return Unfold(go(n.value))
        if isinstance(n, PrimC):
            return PrimC(n.name, tuple(go(a) for a in n.args))
        if isinstance(n, PrimB):
            return PrimB(n.name, tuple(go(a) for a in n.args))
        if isinstance(n, App):
            f = go(n.fun)
            return App(f, go(n.arg))
        if isinstance(n, Let):
            b = go(n.bound)
            return Let(n.var, b, go(n.body))
        if isinstance(n, Case):
            s = go(n.scrutinee)
            return Case(s, tuple((t, v, go(body)) for t, v, body in n.branches))
        raise TypeError(f"not a syntax node: {n!r}")

    return go(x)


def factorize(term) -> Tuple[PreTerm, np.ndarray]:
    """Split ``term`` into its pre-term skeleton and the vector of its real
    literals, holes numbered 1..n in reading order."""
    reals: List[float] = []

    def on_real(r):
        reals.append(r.value)
        return Hole(len(reals))

    def on_hole(h):
        raise ValueError("factorize expects a term without holes")

    skel = _map_reals(term, on_real, on_hole)
    return PreTerm(skel, len(reals)), np.array(reals, dtype=float)


def fill(pre: PreTerm, reals: Sequence[float]):
    if len(reals) != pre.hole_count:
        raise ValueError(f"pre-term has {pre.hole_count} holes, got {len(reals)} reals")
    vals = [float(r) for r in reals]
    return _map_reals(pre.skeleton, lambda r: r, lambda h: RealLit(vals[h.index - 1]))


def hole_order(x) -> List[int]:
    """Hole indices of ``x`` in reading order."""
    out: List[int] = []

    def on_hole(h):
        out.append(h.index)
        return h

    _map_reals(x, lambda r: r, on_hole)
    return out


def renumber(x) -> Tuple[object, Tuple[int, ...]]:
    """Renumber the holes of ``x`` canonically (1..l in reading order).

    Returns the renumbered skeleton and, for each new hole, the old index it
    came from. A hole index may occur several times (after substitution of a
    variable occurring more than once) or not at all; the map records both
    duplication and projection.
    """
    sources: List[int] = []

    def on_hole(h):
        sources.append(h.index)
        return Hole(len(sources))

    def on_real(r):
        raise ValueError("renumber expects a skeleton without real literals")

    return _map_reals(x, on_real, on_hole), tuple(sources)


def shift_holes(x, offset: int):
    return _map_reals(x, lambda r: r, lambda h: Hole(h.index + offset))


def is_canonical(pre: PreTerm) -> bool:
    return hole_order(pre.skeleton) == list(range(1, pre.hole_count + 1))
