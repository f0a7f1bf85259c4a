"""Typing judgments for values and terms.

All value forms carry enough annotation (lambda binders, ``inj`` and
``fold`` types) for a unique type to be synthesized; nothing is inferred.
"""

from __future__ import annotations

from typing import Iterable, Mapping, Optional, Sequence, Tuple, Union

from .prims import FULL, PrimRegistry, registry_for
from .terms import (
    App, Case, CtxHole, Fold, Hole, Inj, Lam, Let, PrimB, PrimC, RealLit, Sample,
    Unfold, Val, Var, show,
)
from .types import BOOL, REAL, Arrow, Mu, RealT, Sum, Type, is_closed, types_equal, unfold_type


class TypeCheckError(TypeError):
    pass


class Environment:
    """Ordered typing context ``x1: σ1, ..., xn: σn`` with distinct names
    and closed types."""

    __slots__ = ("_items",)

    def __init__(self, items: Iterable[Tuple[str, Type]] = ()):
        items = tuple(items)
        names = [x for x, _ in items]
        if len(set(names)) != len(names):
            raise TypeCheckError(f"duplicate variables in environment: {names}")
        for x, t in items:
            if not is_closed(t):
                raise TypeCheckError(f"type of {x} is not closed: {t}")
        self._items = items

    EMPTY: "Environment"

    def lookup(self, name: str) -> Type:
        for x, t in self._items:
            if x == name:
                return t
        raise TypeCheckError(f"unbound variable {name!r}")

    def extend(self, name: str, ty: Type) -> "Environment":
        # shadowing drops the outer binding so names stay distinct
        return Environment(tuple((x, t) for x, t in self._items if x != name) + ((name, ty),))

    def __iter__(self):
        return iter(self._items)

    def __len__(self):
        return len(self._items)

    def __repr__(self):
        if not self._items:
            return "Environment(·)"
        return "Environment(" + ", ".join(f"{x}: {t}" for x, t in self._items) + ")"


Environment.EMPTY = Environment()

EnvLike = Union[Environment, Mapping[str, Type], Sequence[Tuple[str, Type]], None]


def _as_env(env: EnvLike) -> Environment:
    if env is None:
        return Environment.EMPTY
    if isinstance(env, Environment):
        return env
    if isinstance(env, Mapping):
        return Environment(env.items())
    return Environment(env)


class _Checker:
    def __init__(self, registry: PrimRegistry, hole_type: Optional[Type]):
        self.registry = registry
        self.hole_type = hole_type

    def value(self, env: Environment, v) -> Type:
        if isinstance(v, Var):
            return env.lookup(v.name)
        if isinstance(v, (RealLit, Hole)):
            return REAL
        if isinstance(v, Inj):
            if not isinstance(v.type, Sum) or not is_closed(v.type):
                raise TypeCheckError(f"inj annotation must be a closed sum type: {v.type}")
            if v.tag not in v.type.tags:
                raise TypeCheckError(f"tag {v.tag!r} not in {v.type}")
            got = self.value(env, v.value)
            want = v.type.component(v.tag)
            if not types_equal(got, want):
                raise TypeCheckError(f"inj {v.tag}: expected {want}, got {got}")
            return v.type
        if isinstance(v, Lam):
            if not is_closed(v.var_type):
                raise TypeCheckError(f"binder type of {v.var} is not closed: {v.var_type}")
            return Arrow(v.var_type, self.term(env.extend(v.var, v.var_type), v.body))
        if isinstance(v, Fold):
            if not isinstance(v.type, Mu) or not is_closed(v.type):
                raise TypeCheckError(f"fold annotation must be a closed recursive type: {v.type}")
            got = self.value(env, v.value)
            want = unfold_type(v.type)
            if not types_equal(got, want):
                raise TypeCheckError(f"fold: expected {want}, got {got}")
            return v.type
        raise TypeCheckError(f"not a value: {v!r}")

    def term(self, env: Environment, t) -> Type:
        if isinstance(t, Val):
            return self.value(env, t.value)
        if isinstance(t, Sample):
            return REAL
        if isinstance(t, (PrimC, PrimB)):
            if t.name not in self.registry:
                raise TypeCheckError(f"unknown primitive {t.name!r}")
            p = self.registry.get(t.name)
            if p.boolean != isinstance(t, PrimB):
                kind = "boolean test" if p.boolean else "real function"
                raise TypeCheckError(f"{t.name!r} is a {kind}")
            if not self.registry.admissible(t.name):
                raise TypeCheckError(
                    f"primitive {t.name!r} is not admissible in {self.registry.mode} mode")
            if len(t.args) != p.arity:
                raise TypeCheckError(f"{t.name!r} expects {p.arity} arguments, got {len(t.args)}")
            for a in t.args:
                ty = self.value(env, a)
                if not isinstance(ty, RealT):
                    raise TypeCheckError(f"argument {show(a)} of {t.name} has type {ty}, expected real")
            return BOOL if p.boolean else REAL
        if isinstance(t, App):
            f = self.value(env, t.fun)
            if not isinstance(f, Arrow):
                raise TypeCheckError(f"applying a non-function of type {f}")
            a = self.value(env, t.arg)
            if not types_equal(f.dom, a):
                raise TypeCheckError(f"argument type mismatch: expected {f.dom}, got {a}")
            return f.cod
        if isinstance(t, Let):
            s = self.term(env, t.bound)
            return self.term(env.extend(t.var, s), t.body)
        if isinstance(t, Case):
            s = self.value(env, t.scrutinee)
            if not isinstance(s, Sum):
                raise TypeCheckError(f"case on non-sum type {s}")
            tags = [b[0] for b in t.branches]
            if sorted(tags) != sorted(s.tags):
                raise TypeCheckError(f"case branches {tags} do not match sum tags {list(s.tags)}")
            result = None
            for tag, x, body in t.branches:
                bt = self.term(env.extend(x, s.component(tag)), body)
                if result is None:
                    result = bt
                elif not types_equal(result, bt):
                    raise TypeCheckError(f"case branches disagree: {result} vs {bt}")
            if result is None:
                raise TypeCheckError("case over the empty sum has no result type")
            return result
        if isinstance(t, Unfold):
            s = self.value(env, t.value)
            if not isinstance(s, Mu):
                raise TypeCheckError(f"unfold of non-recursive type {s}")
            return unfold_type(s)
        if isinstance(t, CtxHole):
            if self.hole_type is None:
                raise TypeCheckError("context hole outside of a context")
            return self.hole_type
        if isinstance(t, (Var, RealLit, Inj, Lam, Fold, Hole)):
            return self.value(env, t)
        raise TypeCheckError(f"not a term: {t!r}")


def typecheck(env: EnvLike, subject, mode: Optional[str] = None,
              registry: Optional[PrimRegistry] = None, hole_type: Optional[Type] = None) -> Type:
    """Type of ``subject`` (a value or a term) under ``env``.

    ``mode`` selects the language: in ``"continuous"`` mode discontinuous
    primitives and boolean tests are rejected. ``hole_type`` types the
    context hole ``[.]`` when checking an observable context.
    """
    reg = registry or registry_for(mode or FULL)
    if mode is not None and reg.mode != mode:
        reg = registry_for(mode, reg.leq_eps)
    if hole_type is not None and not is_closed(hole_type):
        raise TypeCheckError(f"hole type is not closed: {hole_type}")
    return _Checker(reg, hole_type).term(_as_env(env), subject)


def check_program(term, mode: str = FULL) -> Type:
    return typecheck(None, term, mode=mode)
