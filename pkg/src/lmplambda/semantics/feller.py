"""Numerical audit of weak convergence of output measures along a
converging sequence of real vectors plugged into a pre-term."""

from __future__ import annotations

import math
import zlib
from dataclasses import dataclass, field
from typing import Callable, Dict, List, Optional, Sequence

import numpy as np

from ..syntax.preterm import PreTerm, factorize, fill
from ..syntax.prims import FULL, registry_for
from ..syntax.typing import typecheck
from .estimate import _chunks
from .evaluator import compile_term, readback, run_code
from .rng import RngStream

CONVERGENT = "CONVERGENT"
DIVERGENT = "DIVERGENT"
INCONCLUSIVE = "INCONCLUSIVE"


@dataclass(frozen=True)
class TestFunction:
    """A bounded continuous function on the real line, applied to the
    embedding of output values."""

    name: str
    fn: Callable[[np.ndarray], np.ndarray]
    bound: float = 1.0

    def __call__(self, x: np.ndarray) -> np.ndarray:
        return self.fn(x)


def _sigmoid(t: float, width: float):
    return lambda x: 1.0 / (1.0 + np.exp(-np.clip((x - t) / width, -700, 700)))


def _clamped_affine(a: float, b: float):
    return lambda x: np.clip(a * x + b, 0.0, 1.0)


def default_battery(width: float = 0.05) -> List[TestFunction]:
    out = [TestFunction("const1", lambda x: np.ones_like(x))]
    for a, b in ((1.0, 0.0), (-1.0, 1.0), (0.5, 0.5), (2.0, -0.5)):
        out.append(TestFunction(f"clamp({a}*x+{b})", _clamped_affine(a, b)))
    for t in (-1.0, -0.5, 0.0, 0.5, 1.0):
        out.append(TestFunction(f"sigmoid((x-{t})/{width})", _sigmoid(t, width)))
    return out


def validate_battery(battery: Sequence[TestFunction]) -> None:
    if not battery:
        raise ValueError("empty test-function battery")
    probe = np.linspace(-1e3, 1e3, 2001)
    names = set()
    for g in battery:
        if not isinstance(g, TestFunction) or not callable(g.fn):
            raise ValueError(f"malformed test function {g!r}")
        if g.name in names:
            raise ValueError(f"duplicate test function name {g.name!r}")
        names.add(g.name)
        y = np.asarray(g(probe), dtype=float)
        if y.shape != probe.shape or not np.all(np.isfinite(y)) or np.max(np.abs(y)) > g.bound + 1e-12:
            raise ValueError(f"test function {g.name!r} is not bounded by {g.bound} on the probe grid")


def embed(v) -> float:
    """Real embedding of an output value. Reals map to themselves; any
    other value maps to an offset fixed by its skeleton plus a bounded
    continuous summary of its reals, so the map is continuous on each
    skeleton component and separates components."""
    if type(v) is float:
        return v
    pre, reals = factorize(readback(v))
    code = zlib.crc32(str(pre).encode()) % 997
    summary = math.tanh(float(np.mean(reals))) if len(reals) else 0.0
    return 100.0 * (1 + code) + summary


@dataclass
class ConvergenceReport:
    verdict: str
    distances: List[float]
    gaps: Dict[str, List[float]]
    floors: Dict[str, List[float]]
    threshold: float
    samples: int
    seed: int
    fuel: int
    notes: List[str] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "verdict": self.verdict,
            "distances": self.distances,
            "gaps": self.gaps,
            "noise_floors": self.floors,
            "threshold": self.threshold,
            "samples": self.samples,
            "seed": self.seed,
            "fuel": self.fuel,
            "notes": self.notes,
        }


def _embedded_runs(term, reg, fuel: int, samples: int, seed: int):
    """Per-run embedded outputs with NaN for diverging runs; run ``i`` uses
    the same draws for every term (common random numbers)."""
    code = compile_term(term, reg)
    out = np.full(samples, np.nan)
    i = 0
    for k, n in _chunks(samples):
        draw = RngStream(seed, k).uniform
        for _ in range(n):
            res = run_code(code, (), fuel, draw)
            if res is not None:
                out[i] = embed(res[0])
            i += 1
    return out


def _integrand(g: TestFunction, e: np.ndarray) -> np.ndarray:
    h = np.zeros_like(e)
    ok = ~np.isnan(e)
    h[ok] = g(e[ok])
    return h


def feller_audit(pre: PreTerm, target, sequence: Sequence, testfns: Optional[Sequence[TestFunction]] = None,
                 samples: int = 10000, seed: int = 0, fuel: int = 10000, mode: str = FULL,
                 threshold: float = 0.5, tail: int = 1, registry=None) -> ConvergenceReport:
    """Estimate ``|E g(P[r_n]) - E g(P[target])|`` for every test function
    ``g`` and every term of the sequence.

    The same draws are used for every point (common random numbers), and
    the noise floor of a gap is three standard errors of the paired
    difference plus 1e-6. Verdicts: CONVERGENT when on the last ``tail``
    points every gap is below its floor; DIVERGENT when some test
    function keeps a gap of at least ``threshold`` at every point;
    INCONCLUSIVE otherwise.
    """
    battery = list(testfns) if testfns is not None else default_battery()
    validate_battery(battery)
    reg = registry or registry_for(mode)
    target = np.asarray(target, dtype=float)
    seq = [np.asarray(r, dtype=float) for r in sequence]
    if not seq:
        raise ValueError("empty sequence")
    for r in [target] + seq:
        if r.shape != (pre.hole_count,):
            raise ValueError(f"vectors must have {pre.hole_count} entries")
    dist = [float(np.linalg.norm(r - target)) for r in seq]
    if any(b > a + 1e-15 for a, b in zip(dist, dist[1:])) or dist[-1] >= 1e-6:
        raise ValueError("sequence does not converge numerically to the target "
                         "(distances must decrease and end below 1e-6)")
    typecheck(None, fill(pre, target), registry=reg)
    base = _embedded_runs(fill(pre, target), reg, fuel, samples, seed)
    gaps: Dict[str, List[float]] = {g.name: [] for g in battery}
    floors: Dict[str, List[float]] = {g.name: [] for g in battery}
    h0 = {g.name: _integrand(g, base) for g in battery}
    for r in seq:
        e = _embedded_runs(fill(pre, r), reg, fuel, samples, seed)
        for g in battery:
            d = _integrand(g, e) - h0[g.name]
            gaps[g.name].append(abs(float(d.mean())))
            se = float(d.std(ddof=1)) / math.sqrt(samples) if samples > 1 else 0.0
            floors[g.name].append(3.0 * se + 1e-6)
    notes = []
    tail = max(1, min(int(tail), len(seq)))
    if all(x == 0.0 for x in dist):
        verdict = CONVERGENT
        notes.append("degenerate sequence: every point equals the target")
    elif all(all(gp <= fl for gp, fl in zip(gaps[g][-tail:], floors[g][-tail:])) for g in gaps):
        verdict = CONVERGENT
    elif any(all(gp >= threshold for gp in gaps[g]) for g in gaps):
        verdict = DIVERGENT
        for g in gaps:
            if all(gp >= threshold for gp in gaps[g]):
                notes.append(f"persistent gap for {g}: min {min(gaps[g]):.6g}")
    else:
        verdict = INCONCLUSIVE
    return ConvergenceReport(verdict, dist, gaps, floors, threshold, samples, seed, fuel, notes)


def harmonic_sequence(target, count: int = 20, n_max: float = 1e7, sign: float = 1.0) -> List[np.ndarray]:
    """``target + sign / n`` on every coordinate, for ``count`` values of
    ``n`` spaced logarithmically from 1 to ``n_max``."""
    target = np.asarray(target, dtype=float)
    ns = np.unique(np.round(np.logspace(0, math.log10(n_max), count)))
    return [target + sign / n for n in ns]
