"""Labelled Markov processes: finite ones given by explicit kernel matrices,
and the applicative process whose states are typed programs."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, Iterable, Iterator, List, Optional, Sequence, Tuple

from .measures import FiniteMeasure
from .semantics.estimate import estimate
from .semantics.evaluator import EXHAUSTED, Converged, eval_sample
from .semantics.measure import ValueMeasure
from .syntax.parser import parse_type, parse_value
from .syntax.prims import FULL, PrimRegistry, registry_for
from .syntax.terms import App, Fold, Inj, Lam, RealLit, Val, Var, show
from .syntax.types import REAL, Arrow, Mu, RealT, Sum, Type, types_equal, unfold_type
from .syntax.typing import typecheck

ROW_SLACK = Fraction(1, 10 ** 12)
DEFAULT_FUEL = 10000
DEFAULT_RATIONALS = (Fraction(0), Fraction(1, 4), Fraction(1, 2), Fraction(3, 4), Fraction(1))


class LMPFormatError(ValueError):
    pass


# -- finite LMPs ---------------------------------------------------------------


def as_fraction(x) -> Fraction:
    """Exact rational from a JSON number or a ``"p/q"`` string. Floats are
    read through their shortest decimal form, so ``0.1`` means 1/10."""
    if isinstance(x, bool):
        raise LMPFormatError(f"not a weight: {x!r}")
    if isinstance(x, Fraction):
        return x
    if isinstance(x, int):
        return Fraction(x)
    if isinstance(x, float):
        return Fraction(repr(x))
    if isinstance(x, str):
        try:
            return Fraction(x.strip())
        except (ValueError, ZeroDivisionError):
            raise LMPFormatError(f"not a rational weight: {x!r}") from None
    raise LMPFormatError(f"not a weight: {x!r}")


class FiniteLMP:
    """States, labels and one sub-stochastic matrix per label, with exact
    rational entries."""

    def __init__(self, states: Sequence[str], labels: Sequence[str], kernels: Dict[str, Sequence[Sequence]]):
        self.states = [str(s) for s in states]
        self.labels = [str(a) for a in labels]
        if len(set(self.states)) != len(self.states):
            raise LMPFormatError("duplicate state names")
        if len(set(self.labels)) != len(self.labels):
            raise LMPFormatError("duplicate labels")
        if set(kernels) != set(self.labels):
            raise LMPFormatError(f"kernels given for {sorted(kernels)}, labels are {sorted(self.labels)}")
        n = len(self.states)
        self.kernels: Dict[str, Tuple[Tuple[Fraction, ...], ...]] = {}
        for a in self.labels:
            rows = kernels[a]
            if len(rows) != n or any(len(r) != n for r in rows):
                raise LMPFormatError(f"kernel for {a!r} is not {n}x{n}")
            mat = tuple(tuple(as_fraction(x) for x in r) for r in rows)
            for s, r in zip(self.states, mat):
                if any(x < 0 for x in r):
                    raise LMPFormatError(f"negative entry in kernel {a!r}, row {s!r}")
                if sum(r) > 1 + ROW_SLACK:
                    raise LMPFormatError(f"row sum {float(sum(r))} > 1 in kernel {a!r}, row {s!r}")
            self.kernels[a] = mat
        self.index = {s: i for i, s in enumerate(self.states)}

    def __len__(self):
        return len(self.states)

    def row(self, label: str, s) -> Tuple[Fraction, ...]:
        if label not in self.kernels:
            raise KeyError(f"unknown label {label!r}")
        i = s if isinstance(s, int) else self.index[s]
        return self.kernels[label][i]

    def h(self, label: str, s) -> FiniteMeasure:
        return FiniteMeasure({t: w for t, w in zip(self.states, self.row(label, s)) if w})

    def mass(self, label: str, s, targets: Iterable[int]) -> Fraction:
        r = self.row(label, s)
        return sum((r[j] for j in targets), Fraction(0))

    def to_json(self) -> dict:
        def enc(w: Fraction):
            return int(w) if w.denominator == 1 else f"{w.numerator}/{w.denominator}"

        return {
            "states": list(self.states),
            "labels": list(self.labels),
            "kernels": {a: [[enc(w) for w in r] for r in self.kernels[a]] for a in self.labels},
        }

    def __repr__(self):
        return f"FiniteLMP({len(self.states)} states, labels={self.labels})"


def finite_lmp_from_json(data) -> FiniteLMP:
    if not isinstance(data, dict):
        raise LMPFormatError("an LMP file holds a JSON object")
    for key in ("states", "labels", "kernels"):
        if key not in data:
            raise LMPFormatError(f"missing key {key!r}")
    if not isinstance(data["states"], list) or not isinstance(data["labels"], list):
        raise LMPFormatError("states and labels must be lists")
    if not isinstance(data["kernels"], dict):
        raise LMPFormatError("kernels must be an object keyed by label")
    return FiniteLMP(data["states"], data["labels"], data["kernels"])


def load_finite_lmp(path) -> FiniteLMP:
    with open(path, encoding="utf-8") as fh:
        try:
            data = json.load(fh)
        except json.JSONDecodeError as e:
            raise LMPFormatError(f"{path}: {e}") from None
    return finite_lmp_from_json(data)


# -- the applicative LMP ------------------------------------------------------------


@dataclass(frozen=True)
class TermState:
    term: object
    type: Type

    def __str__(self):
        return f"({show(self.term)} : {self.type})"


@dataclass(frozen=True)
class ValueState:
    value: object
    type: Type

    @property
    def term(self):
        return Val(self.value)

    def __str__(self):
        return f"({show(self.value)} : {self.type})"


AppState = (TermState, ValueState)


def make_state(subject, registry: Optional[PrimRegistry] = None):
    """Typed state for a closed term or value. A term that is just a
    value gives a value state."""
    ty = typecheck(None, subject, registry=registry)
    if isinstance(subject, Val):
        return ValueState(subject.value, ty)
    if isinstance(subject, (Var, RealLit, Inj, Lam, Fold)):
        return ValueState(subject, ty)
    return TermState(subject, ty)


# actions


@dataclass(frozen=True)
class TypeLoop:
    type: Type

    @property
    def text(self):
        return f"type:{self.type}"


@dataclass(frozen=True)
class PassValue:
    value: object
    type: Type

    @property
    def text(self):
        return "pass:{" + show(self.value) + "}"


@dataclass(frozen=True)
class Eval:
    @property
    def text(self):
        return "eval"


@dataclass(frozen=True)
class LeqTest:
    q: Fraction

    def __post_init__(self):
        object.__setattr__(self, "q", Fraction(self.q))

    @property
    def text(self):
        return f"leq:{self.q}"


@dataclass(frozen=True)
class CaseProbe:
    tag: str

    @property
    def text(self):
        return f"case:{self.tag}"


@dataclass(frozen=True)
class Unbox:
    @property
    def text(self):
        return "unbox"


EVAL = Eval()
UNBOX = Unbox()
ACTION_TYPES = (TypeLoop, PassValue, Eval, LeqTest, CaseProbe, Unbox)


def parse_action(text: str, registry: Optional[PrimRegistry] = None):
    """Inverse of ``action.text``."""
    text = text.strip()
    if text == "eval":
        return EVAL
    if text == "unbox":
        return UNBOX
    head, sep, rest = text.partition(":")
    if not sep:
        raise ValueError(f"unknown label {text!r}")
    if head == "leq":
        return LeqTest(Fraction(rest.strip()))
    if head == "case":
        return CaseProbe(rest.strip())
    if head == "type":
        return TypeLoop(parse_type(rest))
    if head == "pass":
        src = rest.strip()
        if not (src.startswith("{") and src.endswith("}")):
            raise ValueError("pass labels carry their value in braces")
        v = parse_value(src[1:-1], registry)
        return PassValue(v, typecheck(None, Val(v), registry=registry))
    raise ValueError(f"unknown label {text!r}")


# steps


@dataclass(frozen=True)
class DiracTo:
    target: object


@dataclass(frozen=True)
class WeightedDirac:
    weight: float
    target: object

    def __post_init__(self):
        if not 0.0 <= self.weight <= 1.0:
            raise ValueError(f"weight {self.weight} outside [0, 1]")


@dataclass(frozen=True)
class EvalMeasure:
    """Handle on the output measure of a term: sampled, never
    materialized."""

    term: object
    type: Type
    fuel: int
    registry: PrimRegistry = field(repr=False, compare=False)

    def sample(self, rng) -> Optional[ValueState]:
        out = eval_sample(self.term, self.fuel, rng, self.registry)
        if out is EXHAUSTED:
            return None
        return ValueState(out.value, self.type)

    def estimate(self, samples: int, seed: int) -> ValueMeasure:
        return estimate(self.term, samples, self.fuel, seed, registry=self.registry, type_=self.type)


@dataclass(frozen=True)
class NullStep:
    def __bool__(self):
        return False


NULL = NullStep()


def app_step(s, a, fuel: int = DEFAULT_FUEL, registry: Optional[PrimRegistry] = None, check: bool = False):
    """Kernel of the applicative LMP on one state and one action."""
    reg = registry or registry_for(FULL)
    out = _step(s, a, fuel, reg)
    if check and isinstance(out, (DiracTo, WeightedDirac)):
        t = out.target
        got = typecheck(None, t.term, registry=reg)
        if not types_equal(got, t.type):
            raise AssertionError(f"step target {t} has type {got}")
    return out


def _step(s, a, fuel, reg):
    if isinstance(a, TypeLoop):
        return DiracTo(s) if types_equal(s.type, a.type) else NULL
    if isinstance(a, Eval):
        if isinstance(s, ValueState):
            return DiracTo(s)
        if isinstance(s.term, Val):
            return DiracTo(ValueState(s.term.value, s.type))
        return EvalMeasure(s.term, s.type, int(fuel), reg)
    if not isinstance(s, ValueState):
        return NULL
    v, ty = s.value, s.type
    if isinstance(a, PassValue):
        if isinstance(ty, Arrow) and types_equal(ty.dom, a.type):
            return DiracTo(TermState(App(v, a.value), ty.cod))
        return NULL
    if isinstance(a, LeqTest):
        if isinstance(ty, RealT) and isinstance(v, RealLit):
            return WeightedDirac(float(reg.op_leq(v.value, float(a.q))), s)
        return NULL
    if isinstance(a, CaseProbe):
        if isinstance(ty, Sum) and isinstance(v, Inj) and v.tag == a.tag:
            return DiracTo(ValueState(v.value, ty.component(a.tag)))
        return NULL
    if isinstance(a, Unbox):
        if isinstance(ty, Mu) and isinstance(v, Fold):
            return DiracTo(ValueState(v.value, unfold_type(ty)))
        return NULL
    return NULL


# -- rational-label restriction -----------------------------------------------------


def values_of_type(ty: Type, depth: int, rationals: Iterable = DEFAULT_RATIONALS,
                   scope: Tuple[Tuple[str, Type], ...] = ()) -> List[Tuple[int, object]]:
    """Values of type ``ty`` built from the given rationals with at most
    ``depth`` nested constructors (lambda, injection, fold), as
    ``(depth, value)`` pairs."""
    qs = sorted({Fraction(q) for q in rationals})
    out: List[Tuple[int, object]] = []
    for name, vt in scope:
        if types_equal(vt, ty):
            out.append((0, Var(name)))
    if isinstance(ty, RealT):
        out.extend((0, RealLit(float(q))) for q in qs)
    elif depth >= 1:
        if isinstance(ty, Arrow):
            x = f"x{len(scope)}"
            for d, body in values_of_type(ty.cod, depth - 1, qs, scope + ((x, ty.dom),)):
                out.append((d + 1, Lam(x, ty.dom, Val(body))))
        elif isinstance(ty, Sum):
            for tag, comp in ty.branches:
                for d, v in values_of_type(comp, depth - 1, qs, scope):
                    out.append((d + 1, Inj(tag, v, ty)))
        elif isinstance(ty, Mu):
            for d, v in values_of_type(unfold_type(ty), depth - 1, qs, scope):
                out.append((d + 1, Fold(v, ty)))
    return out


def _canonical_values(ty, depth, rationals):
    vals = values_of_type(ty, depth, rationals)
    seen = set()
    out = []
    for d, v in sorted(vals, key=lambda p: (p[0], show(p[1]))):
        key = show(v)
        if key not in seen:
            seen.add(key)
            out.append(v)
    return out


def _sum_tags(types: Iterable[Type], depth: int) -> List[str]:
    tags = set()

    def go(t, d, seen):
        if isinstance(t, Sum):
            for tag, c in t.branches:
                tags.add(tag)
                go(c, d, seen)
        elif isinstance(t, Arrow):
            go(t.dom, d, seen)
            go(t.cod, d, seen)
        elif isinstance(t, Mu) and t not in seen and d > 0:
            go(unfold_type(t), d - 1, seen | {t})

    for t in types:
        go(t, depth + 1, frozenset())
    return sorted(tags)


def rational_label_family(depth: int = 1, rationals: Iterable = DEFAULT_RATIONALS,
                          types: Sequence[Type] = (REAL,)) -> Iterator:
    """The countable restriction of the action set: structural actions
    first, then value-passing actions over each of ``types`` with values
    ordered by depth and then by printed form."""
    if depth < 0:
        raise ValueError("depth must be nonnegative")
    qs = sorted({Fraction(q) for q in rationals})
    yield EVAL
    yield UNBOX
    for q in qs:
        yield LeqTest(q)
    for tag in _sum_tags(types, depth):
        yield CaseProbe(tag)
    for t in types:
        yield TypeLoop(t)
    for t in types:
        for v in _canonical_values(t, depth, qs):
            yield PassValue(v, t)


def enabled_actions(s_kind: str, ty: Type, depth: int = 1, rationals: Iterable = DEFAULT_RATIONALS) -> List:
    """Actions of the restricted family that can move a state of the given
    kind (``"term"`` or ``"value"``) and type, excluding the type loop and
    evaluation of a value (both are the identity)."""
    if s_kind == "term":
        return [EVAL]
    qs = sorted({Fraction(q) for q in rationals})
    if isinstance(ty, RealT):
        return [LeqTest(q) for q in qs]
    if isinstance(ty, Arrow):
        return [PassValue(v, ty.dom) for v in _canonical_values(ty.dom, depth, qs)]
    if isinstance(ty, Sum):
        return [CaseProbe(tag) for tag in ty.tags]
    if isinstance(ty, Mu):
        return [UNBOX]
    return []


def action_target(s_kind: str, ty: Type, a) -> Tuple[str, Type]:
    """Kind and type of the state reached from a state of the given kind
    and type by an enabled action."""
    if isinstance(a, Eval):
        return "value", ty
    if isinstance(a, LeqTest):
        return "value", ty
    if isinstance(a, PassValue):
        return "term", ty.cod
    if isinstance(a, CaseProbe):
        return "value", ty.component(a.tag)
    if isinstance(a, Unbox):
        return "value", unfold_type(ty)
    if isinstance(a, TypeLoop):
        return s_kind, ty
    raise TypeError(f"not an action: {a!r}")
