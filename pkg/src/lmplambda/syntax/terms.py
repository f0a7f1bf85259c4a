"""Abstract syntax for values and terms, printing, free variables and
capture-avoiding substitution.

Values and terms are separate syntactic classes: every term is explicitly
sequenced through ``let``, and ``Val`` injects a value into terms.
"""

from __future__ import annotations

import itertools
import re
from dataclasses import dataclass
from typing import Dict, Iterable, Mapping, Optional, Tuple, Union

from .types import Arrow, Mu, Sum, Type


# -- values ------------------------------------------------------------------


@dataclass(frozen=True)
class Var:
    name: str


@dataclass(frozen=True)
class RealLit:
    value: float

    def __post_init__(self):
        object.__setattr__(self, "value", float(self.value))


@dataclass(frozen=True)
class Inj:
    """``inj<σ> tag V``. The sum type is mandatory so values synthesize a
    unique type."""

    tag: str
    value: "Value"
    type: Sum


@dataclass(frozen=True)
class Lam:
    var: str
    var_type: Type
    body: "Term"


@dataclass(frozen=True)
class Fold:
    value: "Value"
    type: Mu


@dataclass(frozen=True)
class Hole:
    """Numbered real hole ``[·]^i`` of a pre-term (1-based)."""

    index: int


Value = Union[Var, RealLit, Inj, Lam, Fold, Hole]


# -- terms -------------------------------------------------------------------


@dataclass(frozen=True)
class Val:
    value: Value


@dataclass(frozen=True)
class Sample:
    pass


@dataclass(frozen=True)
class PrimC:
    name: str
    args: Tuple[Value, ...]


@dataclass(frozen=True)
class PrimB:
    name: str
    args: Tuple[Value, ...]


@dataclass(frozen=True)
class Case:
    scrutinee: Value
    branches: Tuple[Tuple[str, str, "Term"], ...]

    def __post_init__(self):
        object.__setattr__(self, "branches", tuple(sorted(self.branches, key=lambda b: b[0])))

    def branch(self, tag: str) -> Tuple[str, "Term"]:
        for t, x, body in self.branches:
            if t == tag:
                return x, body
        raise KeyError(tag)


@dataclass(frozen=True)
class App:
    fun: Value
    arg: Value


@dataclass(frozen=True)
class Let:
    var: str
    bound: "Term"
    body: "Term"


@dataclass(frozen=True)
class Unfold:
    value: Value


@dataclass(frozen=True)
class CtxHole:
    """The hole ``[.]`` of an observable context (a term position)."""


Term = Union[Val, Sample, PrimC, PrimB, Case, App, Let, Unfold, CtxHole]

VALUE_TYPES = (Var, RealLit, Inj, Lam, Fold, Hole)
TERM_TYPES = (Val, Sample, PrimC, PrimB, Case, App, Let, Unfold, CtxHole)

SAMPLE = Sample()


def is_value(x) -> bool:
    return isinstance(x, VALUE_TYPES)


def as_term(x) -> Term:
    return Val(x) if isinstance(x, VALUE_TYPES) else x


# -- printing ----------------------------------------------------------------


def show_real(r: float) -> str:
    s = repr(float(r))
    if s in ("inf", "-inf", "nan"):
        raise ValueError(f"non-finite literal {s} has no concrete syntax")
    return s


def _atom_value(v: Value) -> str:
    if isinstance(v, (Var, RealLit, Hole)):
        return show(v)
    return "(" + show(v) + ")"


def _atom_term(t: Term) -> str:
    if isinstance(t, Val):
        return _atom_value(t.value)
    if isinstance(t, (Sample, PrimC, PrimB, CtxHole)):
        return show(t)
    return "(" + show(t) + ")"


def show(x) -> str:
    """Concrete syntax of a value or term; the output reparses to the same
    AST."""
    if isinstance(x, Var):
        return x.name
    if isinstance(x, RealLit):
        return show_real(x.value)
    if isinstance(x, Hole):
        return f"[#{x.index}]"
    if isinstance(x, Inj):
        return f"inj<{x.type}> {x.tag} {_atom_value(x.value)}"
    if isinstance(x, Lam):
        return f"lam {x.var}: {x.var_type}. {show(x.body)}"
    if isinstance(x, Fold):
        return f"fold<{x.type}> {_atom_value(x.value)}"
    if isinstance(x, Val):
        return show(x.value)
    if isinstance(x, Sample):
        return "sample"
    if isinstance(x, (PrimC, PrimB)):
        return f"{x.name}(" + ", ".join(show(a) for a in x.args) + ")"
    if isinstance(x, Case):
        arms = " | ".join(f"{t} {v} => {show(b)}" for t, v, b in x.branches)
        return f"case {_atom_value(x.scrutinee)} {{ {arms} }}"
    if isinstance(x, App):
        return f"{_atom_value(x.fun)} {_atom_value(x.arg)}"
    if isinstance(x, Let):
        return f"let {x.var} = {show(x.bound)} in {show(x.body)}"
    if isinstance(x, Unfold):
        return f"unfold {_atom_value(x.value)}"
    if isinstance(x, CtxHole):
        return "[.]"
    raise TypeError(f"not a syntax node: {x!r}")


# -- structural traversals ---------------------------------------------------


def free_vars(x) -> frozenset:
    if isinstance(x, Var):
        return frozenset([x.name])
    if isinstance(x, (RealLit, Hole, Sample, CtxHole)):
        return frozenset()
    if isinstance(x, (Inj, Fold, Val, Unfold)):
        return free_vars(x.value)
    if isinstance(x, Lam):
        return free_vars(x.body) - {x.var}
    if isinstance(x, (PrimC, PrimB)):
        out = frozenset()
        for a in x.args:
            out |= free_vars(a)
        return out
    if isinstance(x, Case):
        out = free_vars(x.scrutinee)
        for _, v, b in x.branches:
            out |= free_vars(b) - {v}
        return out
    if isinstance(x, App):
        return free_vars(x.fun) | free_vars(x.arg)
    if isinstance(x, Let):
        return free_vars(x.bound) | (free_vars(x.body) - {x.var})
    raise TypeError(f"not a syntax node: {x!r}")


def all_names(x) -> set:
    """Every variable name occurring in ``x``, bound or free."""
    out = set()

    def go(n):
        if isinstance(n, Var):
            out.add(n.name)
        elif isinstance(n, (Inj, Fold, Val, Unfold)):
            go(n.value)
        elif isinstance(n, Lam):
            out.add(n.var)
            go(n.body)
        elif isinstance(n, (PrimC, PrimB)):
            for a in n.args:
                go(a)
        elif isinstance(n, Case):
            go(n.scrutinee)
            for _, v, b in n.branches:
                out.add(v)
                go(b)
        elif isinstance(n, App):
            go(n.fun)
            go(n.arg)
        elif isinstance(n, Let):
            out.add(n.var)
            go(n.bound)
            go(n.body)

    go(x)
    return out


_SUFFIX = re.compile(r"^(.*?)(_\d+)?$")


def fresh_name(base: str, avoid: Iterable[str]) -> str:
    avoid = set(avoid)
    stem = _SUFFIX.match(base).group(1) or "v"
    for i in itertools.count(1):
        cand = f"{stem}_{i}"
        if cand not in avoid:
            return cand
    raise AssertionError("unreachable")


def substitute(x, var: str, arg: Value):
    """Capture-avoiding ``x[arg/var]``; binders that would capture a free
    variable of ``arg`` are alpha-renamed first."""
    return substitute_many(x, {var: arg})


def substitute_many(x, mapping: Mapping[str, Value]):
    if not mapping:
        return x
    arg_fv = frozenset()
    for v in mapping.values():
        arg_fv |= free_vars(v)
    return _subst(x, dict(mapping), arg_fv)


def _binder(var: str, body, mapping: Dict[str, Value], arg_fv: frozenset):
    """Handle a binder ``var`` over ``body``; returns the (possibly renamed)
    binder and the substituted body."""
    inner = {k: v for k, v in mapping.items() if k != var}
    if not inner:
        return var, body
    body_fv = free_vars(body)
    if not any(k in body_fv for k in inner):
        return var, body
    if var in arg_fv:
        new = fresh_name(var, arg_fv | all_names(body) | set(inner))
        body = _subst(body, {var: Var(new)}, frozenset([new]))
        var = new
    return var, _subst(body, inner, arg_fv)


def _subst(x, mapping: Dict[str, Value], arg_fv: frozenset):
    if isinstance(x, Var):
        return mapping.get(x.name, x)
    if isinstance(x, (RealLit, Hole, Sample, CtxHole)):
        return x
    if isinstance(x, Inj):
        return Inj(x.tag, _subst(x.value, mapping, arg_fv), x.type)
    if isinstance(x, Fold):
        return Fold(_subst(x.value, mapping, arg_fv), x.type)
    if isinstance(x, Lam):
        v, body = _binder(x.var, x.body, mapping, arg_fv)
        return Lam(v, x.var_type, body)
    if isinstance(x, Val):
        return Val(_subst(x.value, mapping, arg_fv))
    if isinstance(x, Unfold):
        return Unfold(_subst(x.value, mapping, arg_fv))
    if isinstance(x, PrimC):
        return PrimC(x.name, tuple(_subst(a, mapping, arg_fv) for a in x.args))
    if isinstance(x, PrimB):
        return PrimB(x.name, tuple(_subst(a, mapping, arg_fv) for a in x.args))
    if isinstance(x, App):
        return App(_subst(x.fun, mapping, arg_fv), _subst(x.arg, mapping, arg_fv))
    if isinstance(x, Let):
        bound = _subst(x.bound, mapping, arg_fv)
        v, body = _binder(x.var, x.body, mapping, arg_fv)
        return Let(v, bound, body)
    if isinstance(x, Case):
        scrut = _subst(x.scrutinee, mapping, arg_fv)
        arms = []
        for tag, v, body in x.branches:
            v2, body2 = _binder(v, body, mapping, arg_fv)
            arms.append((tag, v2, body2))
        return Case(scrut, tuple(arms))
    raise TypeError(f"not a syntax node: {x!r}")


def plug(context: Term, filler: Term) -> Term:
    """Replace every ``[.]`` in ``context`` by ``filler``. Plain
    replacement: binders of the context may capture free variables of the
    filler, as is conventional for contexts."""

    def go(n):
        if isinstance(n, CtxHole):
            return filler
        if isinstance(n, Let):
            return Let(n.var, go(n.bound), go(n.body))
        if isinstance(n, Val):
            return Val(_plug_value(n.value))
        if isinstance(n, Unfold):
            return Unfold(_plug_value(n.value))
        if isinstance(n, Case):
            return Case(_plug_value(n.scrutinee), tuple((t, v, go(b)) for t, v, b in n.branches))
        if isinstance(n, App):
            return App(_plug_value(n.fun), _plug_value(n.arg))
        return n

    def _plug_value(v):
        if isinstance(v, Lam):
            return Lam(v.var, v.var_type, go(v.body))
        if isinstance(v, Inj):
            return Inj(v.tag, _plug_value(v.value), v.type)
        if isinstance(v, Fold):
            return Fold(_plug_value(v.value), v.type)
        return v

    return go(context)


def contains(x, node_type) -> bool:
    """Whether a node of the given class occurs anywhere in ``x``."""
    if isinstance(x, node_type):
        return True
    if isinstance(x, (Inj, Fold, Val, Unfold)):
        return contains(x.value, node_type)
    if isinstance(x, Lam):
        return contains(x.body, node_type)
    if isinstance(x, (PrimC, PrimB)):
        return any(contains(a, node_type) for a in x.args)
    if isinstance(x, Case):
        return contains(x.scrutinee, node_type) or any(contains(b, node_type) for _, _, b in x.branches)
    if isinstance(x, App):
        return contains(x.fun, node_type) or contains(x.arg, node_type)
    if isinstance(x, Let):
        return contains(x.bound, node_type) or contains(x.body, node_type)
    return False


def prim_names(x) -> set:
    out = set()

    def go(n):
        if isinstance(n, (PrimC, PrimB)):
            out.add((type(n).__name__, n.name))
            for a in n.args:
                go(a)
        elif isinstance(n, (Inj, Fold, Val, Unfold)):
            go(n.value)
        elif isinstance(n, Lam):
            go(n.body)
        elif isinstance(n, Case):
            go(n.scrutinee)
            for _, _, b in n.branches:
                go(b)
        elif isinstance(n, App):
            go(n.fun)
            go(n.arg)
        elif isinstance(n, Let):
            go(n.bound)
            go(n.body)

    go(x)
    return out


def size(x) -> int:
    if isinstance(x, (Var, RealLit, Hole, Sample, CtxHole)):
        return 1
    if isinstance(x, (Inj, Fold, Val, Unfold)):
        return 1 + size(x.value)
    if isinstance(x, Lam):
        return 1 + size(x.body)
    if isinstance(x, (PrimC, PrimB)):
        return 1 + sum(size(a) for a in x.args)
    if isinstance(x, Case):
        return 1 + size(x.scrutinee) + sum(size(b) for _, _, b in x.branches)
    if isinstance(x, App):
        return 1 + size(x.fun) + size(x.arg)
    if isinstance(x, Let):
        return 1 + size(x.bound) + size(x.body)
    raise TypeError(f"not a syntax node: {x!r}")


__all__ = [
    "Var", "RealLit", "Inj", "Lam", "Fold", "Hole", "Value",
    "Val", "Sample", "PrimC", "PrimB", "Case", "App", "Let", "Unfold", "CtxHole", "Term",
    "SAMPLE", "is_value", "as_term", "show", "show_real", "free_vars", "all_names",
    "fresh_name", "substitute", "substitute_many", "plug", "contains", "prim_names", "size",
]
