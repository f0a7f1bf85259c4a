"""Types of the calculus: real, type variables, finite sums, arrows and
iso-recursive types."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Tuple, Union


@dataclass(frozen=True)
class RealT:
    def __str__(self) -> str:
        return "real"


@dataclass(frozen=True)
class TVar:
    name: str

    def __str__(self) -> str:
        return self.name


@dataclass(frozen=True)
class Sum:
    """Finite tagged sum. Branches are kept sorted by tag so that two sums
    over the same index set compare equal."""

    branches: Tuple[Tuple[str, "Type"], ...]

    def __post_init__(self):
        branches = tuple(sorted(self.branches, key=lambda b: b[0]))
        tags = [t for t, _ in branches]
        if len(set(tags)) != len(tags):
            raise ValueError(f"duplicate tags in sum type: {tags}")
        object.__setattr__(self, "branches", branches)

    @property
    def tags(self) -> Tuple[str, ...]:
        return tuple(t for t, _ in self.branches)

    def component(self, tag: str) -> "Type":
        for t, ty in self.branches:
            if t == tag:
                return ty
        raise KeyError(tag)

    def __str__(self) -> str:
        inner = ", ".join(f"{t}: {ty}" for t, ty in self.branches)
        return "sum {" + inner + "}"


@dataclass(frozen=True)
class Arrow:
    dom: "Type"
    cod: "Type"

    def __str__(self) -> str:
        dom = f"({self.dom})" if isinstance(self.dom, Mu) else str(self.dom)
        return f"({dom} -> {self.cod})"


@dataclass(frozen=True)
class Mu:
    var: str
    body: "Type"

    def __str__(self) -> str:
        return f"mu {self.var}. {self.body}"


Type = Union[RealT, TVar, Sum, Arrow, Mu]

REAL = RealT()
VOID = Sum(())
UNIT = Arrow(VOID, VOID)
BOOL = Sum((("false", UNIT), ("true", UNIT)))


def sum_type(branches: Iterable[Tuple[str, Type]]) -> Sum:
    return Sum(tuple(branches))


def free_type_vars(t: Type) -> frozenset:
    if isinstance(t, TVar):
        return frozenset([t.name])
    if isinstance(t, RealT):
        return frozenset()
    if isinstance(t, Sum):
        out = frozenset()
        for _, b in t.branches:
            out |= free_type_vars(b)
        return out
    if isinstance(t, Arrow):
        return free_type_vars(t.dom) | free_type_vars(t.cod)
    if isinstance(t, Mu):
        return free_type_vars(t.body) - {t.var}
    raise TypeError(f"not a type: {t!r}")


def is_closed(t: Type) -> bool:
    return not free_type_vars(t)


def subst_type(t: Type, var: str, repl: Type) -> Type:
    """Capture-avoiding ``t[repl/var]``. Only closed replacements occur in
    practice (unfolding a closed recursive type), so binders never need
    renaming; an open replacement that would be captured is rejected."""
    if isinstance(t, TVar):
        return repl if t.name == var else t
    if isinstance(t, RealT):
        return t
    if isinstance(t, Sum):
        return Sum(tuple((tag, subst_type(b, var, repl)) for tag, b in t.branches))
    if isinstance(t, Arrow):
        return Arrow(subst_type(t.dom, var, repl), subst_type(t.cod, var, repl))
    if isinstance(t, Mu):
        if t.var == var:
            return t
        if t.var in free_type_vars(repl):
            raise ValueError("type substitution would capture a free type variable")
        return Mu(t.var, subst_type(t.body, var, repl))
    raise TypeError(f"not a type: {t!r}")


def unfold_type(t: Mu) -> Type:
    return subst_type(t.body, t.var, t)


def canonical(t: Type, _depth: int = 0, _names: Tuple[Tuple[str, str], ...] = ()) -> Type:
    """Rename bound type variables positionally, so that alpha-equivalent
    types become structurally equal."""
    if isinstance(t, TVar):
        for old, new in reversed(_names):
            if old == t.name:
                return TVar(new)
        return t
    if isinstance(t, RealT):
        return t
    if isinstance(t, Sum):
        return Sum(tuple((tag, canonical(b, _depth, _names)) for tag, b in t.branches))
    if isinstance(t, Arrow):
        return Arrow(canonical(t.dom, _depth, _names), canonical(t.cod, _depth, _names))
    if isinstance(t, Mu):
        new = f"'{_depth}"
        return Mu(new, canonical(t.body, _depth + 1, _names + ((t.var, new),)))
    raise TypeError(f"not a type: {t!r}")


def types_equal(a: Type, b: Type) -> bool:
    return a == b or canonical(a) == canonical(b)


def show_type(t: Type) -> str:
    return str(t)
