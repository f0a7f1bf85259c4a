"""Observable contexts: real-typed programs with a hole, used to probe
contextual equivalence by comparing output laws."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import List, Optional, Sequence

from ..measures import ks_two_sample
from ..semantics.estimate import estimate
from ..semantics.measure import ValueMeasure
from ..semantics.rng import mix_stream
from ..syntax.parser import parse
from ..syntax.prims import FULL, PrimRegistry, registry_for
from ..syntax.terms import CtxHole, contains, plug
from ..syntax.types import REAL, Arrow, RealT, Type, types_equal
from ..syntax.typing import TypeCheckError, typecheck
from .report import DISTINGUISHED, NOT_SEPARATED, EquivalenceReport


@dataclass(frozen=True)
class Context:
    name: str  # display form
    source: str

    def term(self, registry: Optional[PrimRegistry] = None):
        t = parse(self.source, registry)
        if not contains(t, CtxHole):
            raise ValueError(f"context {self.name!r} has no hole")
        return t


_RR = "(real -> real)"

_BATTERY = {
    REAL: [
        Context("[.]", "[.]"),
        Context("plus([.], [.])", "plus([.], [.])"),
        Context("times([.], [.])", "times([.], [.])"),
    ],
    Arrow(REAL, REAL): [
        Context("(lam z. z (z 1)) [.]", f"(lam z: {_RR}. z (z 1.0)) [.]"),
        Context("(lam z. z (z 0)) [.]", f"(lam z: {_RR}. z (z 0.0)) [.]"),
        Context("(lam z. z 0) [.]", f"(lam z: {_RR}. z 0.0) [.]"),
        Context("(lam z. z 1/2) [.]", f"(lam z: {_RR}. z 0.5) [.]"),
        Context("(lam z. z 1) [.]", f"(lam z: {_RR}. z 1.0) [.]"),
        Context("(lam z. plus(z 0, z 1)) [.]", f"(lam z: {_RR}. plus(z 0.0, z 1.0)) [.]"),
        Context("(lam z. z (z (z 1))) [.]", f"(lam z: {_RR}. z (z (z 1.0))) [.]"),
    ],
}


def default_contexts(ty: Type) -> List[Context]:
    """The shipped battery for a hole type (empty for types without one)."""
    for k, v in _BATTERY.items():
        if types_equal(k, ty):
            return list(v)
    return []


def compose(context, m, registry: Optional[PrimRegistry] = None):
    """``C[m]`` by plain hole replacement, after checking ``[.]: σ ⊢ C : real``."""
    reg = registry or registry_for(FULL)
    c = context.term(reg) if isinstance(context, Context) else context
    if isinstance(c, str):
        c = parse(c, reg)
    sigma = typecheck(None, m, registry=reg)
    res = typecheck(None, c, registry=reg, hole_type=sigma)
    if not isinstance(res, RealT):
        raise TypeCheckError(f"context is not observable: result type {res}, expected real")
    return plug(c, m)


def context_apply_estimate(context, m, samples: int = 100000, fuel: int = 10000, seed: int = 0,
                           registry: Optional[PrimRegistry] = None) -> ValueMeasure:
    reg = registry or registry_for(FULL)
    return estimate(compose(context, m, reg), samples, fuel, seed, registry=reg, type_=REAL)


def _two_proportion_z(p1: float, p2: float, n1: int, n2: int) -> float:
    p = (p1 * n1 + p2 * n2) / (n1 + n2)
    s = math.sqrt(max(p * (1 - p), 0.0) * (1 / n1 + 1 / n2))
    if s == 0.0:
        return 0.0 if p1 == p2 else math.inf
    return abs(p1 - p2) / s


def _z_critical(alpha: float) -> float:
    from scipy.stats import norm

    return float(norm.isf(alpha / 2))


def compare_measures(a: ValueMeasure, b: ValueMeasure, alpha: float) -> dict:
    """Mass (two-proportion z test) and shape (two-sample KS on the
    converged parts), each at level ``alpha / 2``."""
    out = {"mass_a": a.mass, "mass_b": b.mass}
    zc = _z_critical(alpha / 2)
    z = _two_proportion_z(a.mass, b.mass, a.runs, b.runs)
    out["mass_z"] = z
    out["mass_z_critical"] = zc
    reject = z > zc
    if len(a.values) and len(b.values):
        ks = ks_two_sample(a, b, alpha / 2)
        out["ks"] = ks.to_dict()
        reject = reject or ks.reject
    out["reject"] = bool(reject)
    return out


def distinguish_by_contexts(m, n, contexts: Optional[Sequence[Context]] = None, samples: int = 100000,
                            fuel: int = 10000, seed: int = 0, level: float = 0.99,
                            registry: Optional[PrimRegistry] = None) -> EquivalenceReport:
    """Runs every context on both programs. The family-wise error is held
    at ``1 - level`` by a Bonferroni split over the contexts."""
    reg = registry or registry_for(FULL)
    ty_m = typecheck(None, m, registry=reg)
    ty_n = typecheck(None, n, registry=reg)
    if not types_equal(ty_m, ty_n):
        raise TypeError(f"programs have different types: {ty_m} vs {ty_n}")
    ctxs = list(contexts) if contexts is not None else default_contexts(ty_m)
    alpha = (1.0 - level) / max(1, len(ctxs))
    results = []
    witness = None
    for i, c in enumerate(ctxs):
        s = mix_stream(seed, i)
        a = context_apply_estimate(c, m, samples, fuel, s, reg)
        b = context_apply_estimate(c, n, samples, fuel, s, reg)
        cmp = compare_measures(a, b, alpha)
        cmp["context"] = c.name
        cmp["seed"] = s
        results.append(cmp)
        if cmp["reject"] and witness is None:
            witness = {"kind": "context", "context": c.name, "source": c.source, "comparison": cmp,
                       "replay": {"seed": s, "samples": samples, "fuel": fuel}}
    budget = {"contexts": len(ctxs), "samples": samples, "fuel": fuel, "level": level,
              "per_context_alpha": alpha}
    details = {"results": results}
    if witness is not None:
        return EquivalenceReport(DISTINGUISHED, witness, budget, [seed], details)
    return EquivalenceReport(NOT_SEPARATED, None, budget, [seed], details)
