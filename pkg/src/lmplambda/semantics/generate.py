"""Random closed programs of the continuous fragment and the soundness
check of the modular semantics on them.

Generated programs have type ``real``. They use ``sample``, ``let``,
continuous primitives, applications of abstractions, ``case`` on a known
injection and ``unfold`` of a ``fold``. Real literals are the holes of the
pre-term obtained by factorization.
"""

from __future__ import annotations

import math
import random
import time
from dataclasses import dataclass, field
from typing import List, Optional

import numpy as np

from ..measures import ks_two_sample
from ..syntax.preterm import factorize, fill
from ..syntax.prims import CONTINUOUS, registry_for
from ..syntax.terms import App, Case, Fold, Inj, Lam, Let, PrimC, RealLit, Sample, Unfold, Val, Var, show
from ..syntax.types import REAL, Mu, Sum
from ..syntax.typing import typecheck
from .estimate import estimate
from .grid import DrawBoundExceeded, exact_eval_grid
from .modular import modular_eval, modular_grid, modular_reconstruct
from .rng import mix_stream

PRIMS = {"plus": 2, "minus": 2, "times": 2, "min": 2, "max": 2, "neg": 1, "abs": 1, "sin": 1, "cos": 1,
         "sigmoid": 1, "leq": 2, "clamp": 3}
PAIR = Sum((("l", REAL), ("r", REAL)))
BOX = Mu("a", REAL)


class _Gen:
    def __init__(self, rng: random.Random, max_draws: Optional[int]):
        self.rng = rng
        self.n = 0
        self.draws = 0
        self.max_draws = max_draws

    def fresh(self, base="x") -> str:
        self.n += 1
        return f"{base}{self.n}"

    def atom(self, env: List[str]):
        if env and self.rng.random() < 0.6:
            return Var(self.rng.choice(env))
        return RealLit(round(self.rng.uniform(-2.0, 2.0), 2))

    def sample(self, env):
        if self.max_draws is not None and self.draws >= self.max_draws:
            return Val(self.atom(env))
        self.draws += 1
        return Sample()

    def term(self, depth: int, env: List[str]):
        r = self.rng
        if depth <= 0:
            return self.sample(env) if r.random() < 0.4 else Val(self.atom(env))
        k = r.randrange(7)
        if k == 0:
            return self.sample(env)
        if k == 1:
            name = r.choice(sorted(PRIMS))
            return PrimC(name, tuple(self.atom(env) for _ in range(PRIMS[name])))
        if k == 2 or k == 3:
            x = self.fresh()
            bound = self.term(depth - 1, env)
            return Let(x, bound, self.term(depth - 1, env + [x]))
        if k == 4:
            y = self.fresh("y")
            f = Lam(y, REAL, self.term(depth - 1, env + [y]))
            if r.random() < 0.5:
                return App(f, self.atom(env))
            g, u = self.fresh("f"), self.fresh("u")
            return Let(g, Val(f), Let(u, App(Var(g), self.atom(env)), App(Var(g), Var(u))))
        if k == 5:
            tag = r.choice(PAIR.tags)
            branches = []
            for t in PAIR.tags:
                z = self.fresh("z")
                branches.append((t, z, self.term(depth - 1, env + [z])))
            return Case(Inj(tag, self.atom(env), PAIR), tuple(branches))
        x = self.fresh()
        return Let(x, Unfold(Fold(self.atom(env), BOX)), self.term(depth - 1, env + [x]))


def random_program(rng: random.Random, depth: int = 5, max_draws: Optional[int] = None):
    """A closed continuous-fragment program of type ``real`` whose syntax
    tree has nesting depth at most ``depth`` (binders and bodies count one
    level each)."""
    g = _Gen(rng, max_draws)
    t = g.term(depth, [])
    typecheck(None, t, mode=CONTINUOUS)
    return t


def random_preterm(rng: random.Random, depth: int = 5, max_draws: Optional[int] = None):
    """``(pre-term, reals)`` factorization of :func:`random_program`."""
    return factorize(random_program(rng, depth, max_draws))


@dataclass
class ModularCheck:
    program: str
    holes: int
    draws: int
    ks: dict
    grid_distance: Optional[float] = None
    mass_gap: float = 0.0

    @property
    def ok(self) -> bool:
        return not self.ks["reject"] and (self.grid_distance is None or self.grid_distance <= 1e-3)

    def to_dict(self) -> dict:
        return {"program": self.program, "holes": self.holes, "draws": self.draws, "ks": self.ks,
                "grid_distance": self.grid_distance, "mass_gap": self.mass_gap, "ok": self.ok}


@dataclass
class ModularReport:
    checks: List[ModularCheck] = field(default_factory=list)
    seconds: float = 0.0

    @property
    def ks_failures(self) -> List[ModularCheck]:
        return [c for c in self.checks if c.ks["reject"]]

    @property
    def grid_checked(self) -> List[ModularCheck]:
        return [c for c in self.checks if c.grid_distance is not None]

    @property
    def grid_failures(self) -> List[ModularCheck]:
        return [c for c in self.grid_checked if c.grid_distance > 1e-3]

    @property
    def ok(self) -> bool:
        return all(c.ok for c in self.checks)


def _quantile_steps(m):
    x = m.reals()
    order = np.argsort(x, kind="stable")
    return x[order], np.cumsum(m.weights[order])


def grid_distance(a, b) -> float:
    """Largest displacement between the quantile functions of two discrete
    measures over reals (the W-infinity distance on their common mass),
    plus the mass difference. Unlike a sup distance between distribution
    functions, it is insensitive to last-bit differences between the
    scalar and vectorised primitives."""
    gap = abs(a.mass - b.mass)
    if not len(a.values) or not len(b.values):
        return gap if not (len(a.values) or len(b.values)) else math.inf
    xa, ca = _quantile_steps(a)
    xb, cb = _quantile_steps(b)
    top = min(ca[-1], cb[-1])
    cuts = np.union1d(ca[ca < top], cb[cb < top])
    edges = np.concatenate(([0.0], cuts, [top]))
    mids = (edges[:-1] + edges[1:]) / 2
    qa = xa[np.minimum(np.searchsorted(ca, mids), len(xa) - 1)]
    qb = xb[np.minimum(np.searchsorted(cb, mids), len(xb) - 1)]
    return float(np.max(np.abs(qa - qb))) + gap


def check_modular(count: int = 100, depth: int = 5, samples: int = 100000, seed: int = 0,
                  fuel: int = 10000, grid_m: int = 64, alpha: float = 0.01) -> ModularReport:
    """Compare the modular reconstruction with direct sampling on ``count``
    random programs (two-sample KS at level ``alpha``); programs with at
    most two draws are also compared exactly on the midpoint grid."""
    t0 = time.perf_counter()
    reg = registry_for(CONTINUOUS)
    rng = random.Random(seed)
    rep = ModularReport()
    for i in range(count):
        term = random_program(rng, depth)
        pre, reals = factorize(term)
        dist = modular_eval(pre, fuel, registry=reg)
        s = mix_stream(seed, i)
        a = modular_reconstruct(pre, reals, fuel, samples, s, registry=reg, dist=dist)
        b = estimate(fill(pre, reals), samples, fuel, mix_stream(seed, i, 1), registry=reg)
        ks = ks_two_sample(a, b, alpha).to_dict()
        draws = max([e.kernel.draws() for e in dist.entries], default=0)
        gd = None
        if draws <= 2:
            try:
                g1 = exact_eval_grid(fill(pre, reals), fuel, grid_m, registry=reg, max_draws=2)
                g2 = modular_grid(pre, reals, fuel, grid_m, registry=reg, dist=dist)
                gd = grid_distance(g1, g2)
            except DrawBoundExceeded:
                gd = math.inf
        rep.checks.append(ModularCheck(show(term), pre.hole_count, draws, ks, gd, abs(a.mass - b.mass)))
    rep.seconds = time.perf_counter() - t0
    return rep
