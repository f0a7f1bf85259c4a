"""Monte Carlo evaluation of tests on the applicative LMP and budgeted
search for a distinguishing test.

A test is first resolved against the type of the starting state, so that
type loops and type-mismatched actions become null steps. A run then
walks the test on runtime values: ``eval`` samples the evaluator, the
comparison probe multiplies by ``op_leq``, and a conjunction runs both
branches from the same reached state on separate random streams (copies
never share draws). The success probability is the mean of the per-run
products.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Dict, Iterable, Iterator, List, Optional, Tuple

from ..lmp import (
    DEFAULT_FUEL, DEFAULT_RATIONALS, CaseProbe, Eval, LeqTest, PassValue, TermState, TypeLoop, Unbox,
    ValueState, action_target, enabled_actions,
)
from ..semantics.estimate import CHUNK
from ..semantics.evaluator import Closure, FoldV, InjV, apply_runtime, compile_term, run_code, to_runtime
from ..semantics.rng import RngStream, mix_stream
from ..syntax.prims import FULL, PrimRegistry, registry_for
from ..syntax.types import Arrow, Mu, RealT, Sum, types_equal, unfold_type
from .report import DISTINGUISHED, NOT_SEPARATED, EquivalenceReport
from .syntax import OMEGA, Act, Conj, Omega, conjuncts

Z = 3.0
MAX_TEST_SIZE = 64


# -- static resolution ---------------------------------------------------------------

# compiled test nodes
_W, _CONJ, _NULL, _EVAL, _PASS, _LEQ, _CASE, _UNBOX, _LOOP = range(9)


def _resolve(kind: str, ty, t, reg: PrimRegistry, cache: Dict):
    if isinstance(t, Omega):
        return (_W,)
    if isinstance(t, Conj):
        return (_CONJ, _resolve(kind, ty, t.left, reg, cache), _resolve(kind, ty, t.right, reg, cache))
    if not isinstance(t, Act):
        raise TypeError(f"not a test: {t!r}")
    a = t.label
    if isinstance(a, TypeLoop):
        if not types_equal(a.type, ty):
            return (_NULL,)
        return (_LOOP, _resolve(kind, ty, t.then, reg, cache))
    if isinstance(a, Eval):
        return (_EVAL, _resolve("value", ty, t.then, reg, cache))
    if kind != "value":
        return (_NULL,)
    if isinstance(a, PassValue):
        if not (isinstance(ty, Arrow) and types_equal(ty.dom, a.type)):
            return (_NULL,)
        if a not in cache:
            cache[a] = to_runtime(a.value, reg)
        return (_PASS, cache[a], _resolve("term", ty.cod, t.then, reg, cache))
    if isinstance(a, LeqTest):
        if not isinstance(ty, RealT):
            return (_NULL,)
        return (_LEQ, float(a.q), _resolve(kind, ty, t.then, reg, cache))
    if isinstance(a, CaseProbe):
        if not (isinstance(ty, Sum) and a.tag in ty.tags):
            return (_NULL,)
        return (_CASE, a.tag, _resolve(kind, ty.component(a.tag), t.then, reg, cache))
    if isinstance(a, Unbox):
        if not isinstance(ty, Mu):
            return (_NULL,)
        return (_UNBOX, _resolve(kind, unfold_type(ty), t.then, reg, cache))
    raise ValueError(f"action outside the label family: {a!r}")


class _Streams:
    """One random stream per conjunction path, renewed every chunk."""

    def __init__(self, seed: int, test_index: int):
        self.seed = seed
        self.test_index = test_index
        self.chunk = -1
        self._s: Dict[int, RngStream] = {}

    def set_chunk(self, chunk: int):
        if chunk != self.chunk:
            self.chunk = chunk
            self._s = {}

    def draw(self, path: int):
        s = self._s.get(path)
        if s is None:
            s = RngStream(mix_stream(self.seed, self.test_index, path), self.chunk)
            self._s[path] = s
        return s.uniform


def _run(st, node, path: int, streams: _Streams, fuel: int, reg: PrimRegistry) -> float:
    weight = 1.0
    while True:
        op = node[0]
        if op == _W:
            return weight
        if op == _NULL:
            return 0.0
        if op == _CONJ:
            left = _run(st, node[1], 2 * path, streams, fuel, reg)
            if left == 0.0:
                return 0.0
            return weight * left * _run(st, node[2], 2 * path + 1, streams, fuel, reg)
        kind, x = st
        if op == _EVAL:
            if kind == "term":
                out = run_code(x[0], x[1], fuel, streams.draw(path))
            elif kind == "app":
                out = apply_runtime(x[0], x[1], fuel, streams.draw(path))
            else:
                out = (x, 0)
            if out is None:
                return 0.0
            st = ("value", out[0])
            node = node[1]
        elif op == _LOOP:
            node = node[1]
        elif kind != "value":
            return 0.0
        elif op == _PASS:
            if not isinstance(x, Closure):
                return 0.0
            st = ("app", (x, node[1]))
            node = node[2]
        elif op == _LEQ:
            w = reg.op_leq(x, node[1])
            if w <= 0.0:
                return 0.0
            weight *= w
            node = node[2]
        elif op == _CASE:
            if not (isinstance(x, InjV) and x.tag == node[1]):
                return 0.0
            st = ("value", x.v)
            node = node[2]
        elif op == _UNBOX:
            if not isinstance(x, FoldV):
                return 0.0
            st = ("value", x.v)
            node = node[1]
        else:
            raise AssertionError(op)


def _initial(s, reg: PrimRegistry):
    if isinstance(s, ValueState):
        return ("value", to_runtime(s.value, reg)), "value"
    if isinstance(s, TermState):
        return ("term", (compile_term(s.term, reg), ())), "term"
    raise TypeError(f"not an applicative state: {s!r}")


@dataclass(frozen=True)
class TestEstimate:
    mean: float
    se: float
    samples: int
    exact: bool = False

    @property
    def lo(self) -> float:
        return max(0.0, self.mean - Z * self.se)

    @property
    def hi(self) -> float:
        return min(1.0, self.mean + Z * self.se)

    def to_json(self) -> dict:
        return {"mean": self.mean, "se": self.se, "ci": [self.lo, self.hi], "samples": self.samples}


def test_success_mc(s, t, samples: int = 10000, fuel: int = DEFAULT_FUEL, seed: int = 0,
                    registry: Optional[PrimRegistry] = None, test_index: int = 0) -> TestEstimate:
    """Monte Carlo success probability of test ``t`` from state ``s``.

    The standard error uses the binomial bound ``sqrt(p(1-p)/n)``, valid for
    any estimator with values in [0, 1]. Streams are keyed by ``seed``,
    ``test_index``, the conjunction path and the sample chunk."""
    reg = registry or registry_for(FULL)
    if isinstance(t, Omega):
        return TestEstimate(1.0, 0.0, samples, exact=True)
    if samples < 1:
        raise ValueError("samples must be at least 1")
    st, kind = _initial(s, reg)
    node = _resolve(kind, s.type, t, reg, {})
    streams = _Streams(seed, test_index)
    total = 0.0
    fuel = int(fuel)
    for i in range(samples):
        streams.set_chunk(i // CHUNK)
        total += _run(st, node, 1, streams, fuel, reg)
    p = total / samples
    se = math.sqrt(max(p * (1.0 - p), 0.0) / samples)
    return TestEstimate(p, se, samples)


# -- canonical test enumeration -------------------------------------------------------


def _key(t) -> Tuple[int, str]:
    return (t.size, str(t))


class TestEnumerator:
    """Tests from a state of given kind and type, by increasing size and
    then printed form. Type loops and evaluation of values are left out
    (they act as the identity), conjunctions have no ``w`` conjunct and are
    kept in sorted, right-nested form."""

    def __init__(self, depth: int = 1, rationals: Iterable = DEFAULT_RATIONALS):
        self.depth = depth
        self.rationals = sorted({Fraction(q) for q in rationals})
        self._memo: Dict = {}
        self._acts: Dict = {}

    def _actions(self, kind, ty):
        k = (kind, ty)
        if k not in self._acts:
            self._acts[k] = enabled_actions(kind, ty, self.depth, self.rationals)
        return self._acts[k]

    def tests(self, kind: str, ty, size: int) -> List:
        k = (kind, ty, size)
        if k in self._memo:
            return self._memo[k]
        out = []
        if size == 1:
            out.append(OMEGA)
        elif size >= 2:
            for a in self._actions(kind, ty):
                k2, t2 = action_target(kind, ty, a)
                for t in self.tests(k2, t2, size - 1):
                    out.append(Act(a, t))
            for s1 in range(2, size - 2):
                s2 = size - 1 - s1
                lefts = [t for t in self.tests(kind, ty, s1) if isinstance(t, Act)]
                if not lefts:
                    continue
                for t2 in self.tests(kind, ty, s2):
                    if isinstance(t2, Omega):
                        continue
                    first = _key(conjuncts(t2)[0])
                    for t1 in lefts:
                        if _key(t1) <= first:
                            out.append(Conj(t1, t2))
            out.sort(key=_key)
        self._memo[k] = out
        return out

    def iterate(self, kind: str, ty) -> Iterator:
        for size in range(1, MAX_TEST_SIZE + 1):
            yield from self.tests(kind, ty, size)


def enumerate_tests(s, depth: int = 1, rationals: Iterable = DEFAULT_RATIONALS,
                    limit: Optional[int] = None) -> List:
    kind = "value" if isinstance(s, ValueState) else "term"
    out = []
    for t in TestEnumerator(depth, rationals).iterate(kind, s.type):
        if limit is not None and len(out) >= limit:
            break
        out.append(t)
    return out


def separated(a: TestEstimate, b: TestEstimate) -> bool:
    """Disjoint confidence intervals."""
    return a.hi < b.lo or b.hi < a.lo


def standardized_gap(a: TestEstimate, b: TestEstimate) -> float:
    d = abs(a.mean - b.mean)
    s = math.sqrt(a.se ** 2 + b.se ** 2)
    if s == 0.0:
        return 0.0 if d == 0.0 else math.inf
    return d / s


def distinguish_by_tests(a, b, depth: int = 1, rationals: Iterable = DEFAULT_RATIONALS, budget: int = 200,
                         samples: int = 10000, seed: int = 0, fuel: int = DEFAULT_FUEL,
                         registry: Optional[PrimRegistry] = None, stop_at_first: bool = True
                         ) -> EquivalenceReport:
    """Search the canonical test enumeration (at most ``budget`` tests)
    for one whose 3-sigma intervals on the two states are disjoint."""
    if not types_equal(a.type, b.type):
        raise TypeError(f"states have different types: {a.type} vs {b.type}")
    if budget < 1:
        raise ValueError("budget must be positive")
    reg = registry or registry_for(FULL)
    qs = sorted({Fraction(q) for q in rationals})
    # a value and a term of the same type: enumerate from the term side
    tests = enumerate_tests(b if isinstance(b, TermState) else a, depth, qs, budget)
    budget_info = {"tests": budget, "tried": 0, "samples_per_test": samples, "depth": depth,
                   "rationals": [str(q) for q in qs], "fuel": fuel}
    max_gap, max_test = 0.0, None
    witness = None
    for i, t in enumerate(tests):
        ea = test_success_mc(a, t, samples, fuel, seed, reg, test_index=i)
        eb = test_success_mc(b, t, samples, fuel, seed, reg, test_index=i)
        budget_info["tried"] = i + 1
        g = standardized_gap(ea, eb)
        if g > max_gap or max_test is None:
            max_gap, max_test = g, str(t)
        if separated(ea, eb) and witness is None:
            witness = {"kind": "test", "test": str(t), "test_index": i, "a": ea.to_json(), "b": eb.to_json(),
                       "replay": {"seed": seed, "test_index": i, "samples": samples, "fuel": fuel}}
            if stop_at_first:
                break
    details = {"max_standardized_gap": max_gap, "max_gap_test": max_test}
    if witness is not None:
        return EquivalenceReport(DISTINGUISHED, witness, budget_info, [seed], details)
    return EquivalenceReport(NOT_SEPARATED, None, budget_info, [seed], details)
