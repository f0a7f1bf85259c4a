"""Step-indexed sampling evaluator.

Programs are compiled to a small environment-machine code (variables
resolved to positions in a tuple environment) and run by a loop with an
explicit continuation stack, so deep recursion never touches the Python
stack.

Fuel is the step index ``n`` of the approximation semantics. A clause
evaluated with index ``n + 1`` evaluates its premises with index ``n``; for
``let`` both the bound term and the body run at ``n``. A run therefore
succeeds with fuel ``n`` exactly when the depth of its derivation is at most
``n``. Depths per clause: value 1, sample 1, primitive 2, unfold of a fold
2, and application, case and let add one to their premises.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from typing import Optional, Tuple

from ..syntax.prims import FULL, PrimRegistry, registry_for
from ..syntax.terms import (
    App, Case, CtxHole, Fold, Hole, Inj, Lam, Let, PrimB, PrimC, RealLit, Sample, Unfold, Val,
    Var, free_vars, show, substitute_many,
)
from ..syntax.types import BOOL, VOID, Mu, Sum, Type

# term opcodes
T_VAL, T_SAMPLE, T_PRIMC, T_PRIMB, T_CASE, T_APP, T_LET, T_UNFOLD = range(8)
# value opcodes
V_VAR, V_REAL, V_INJ, V_LAM, V_FOLD = range(5)


class CompileError(ValueError):
    pass


# -- runtime values -----------------------------------------------------------


class InjV:
    __slots__ = ("tag", "v", "type")

    def __init__(self, tag: str, v, type: Sum):
        self.tag = tag
        self.v = v
        self.type = type


class FoldV:
    __slots__ = ("v", "type")

    def __init__(self, v, type: Mu):
        self.v = v
        self.type = type


@dataclass(frozen=True)
class LamInfo:
    ast: Lam
    scope: Tuple[str, ...]


class Closure:
    __slots__ = ("code", "env", "info")

    def __init__(self, code, env, info: LamInfo):
        self.code = code
        self.env = env
        self.info = info


def readback(v):
    """Syntactic value denoted by a runtime value (closures have their
    environment substituted in)."""
    if type(v) is float:
        return RealLit(v)
    if isinstance(v, InjV):
        return Inj(v.tag, readback(v.v), v.type)
    if isinstance(v, FoldV):
        return Fold(readback(v.v), v.type)
    if isinstance(v, Closure):
        lam = v.info.ast
        fv = free_vars(lam)
        mapping = {}
        for name, val in zip(v.info.scope, v.env):
            if name in fv:
                mapping[name] = val  # later bindings shadow earlier ones
        return substitute_many(lam, {k: readback(x) for k, x in mapping.items()})
    raise TypeError(f"not a runtime value: {v!r}")


def show_value(v) -> str:
    if type(v) is float:
        return repr(v)
    return show(readback(v))


# -- compilation ----------------------------------------------------------------


def _lookup(scope: Tuple[str, ...], name: str) -> int:
    for i in range(len(scope) - 1, -1, -1):
        if scope[i] == name:
            return i
    raise CompileError(f"unbound variable {name!r}")


class _Compiler:
    def __init__(self, registry: PrimRegistry):
        self.reg = registry

    def value(self, v, scope):
        if isinstance(v, Var):
            return (V_VAR, _lookup(scope, v.name))
        if isinstance(v, RealLit):
            return (V_REAL, v.value)
        if isinstance(v, Inj):
            return (V_INJ, v.tag, self.value(v.value, scope), v.type)
        if isinstance(v, Lam):
            body = self.term(v.body, scope + (v.var,))
            return (V_LAM, body, LamInfo(v, scope))
        if isinstance(v, Fold):
            return (V_FOLD, self.value(v.value, scope), v.type)
        if isinstance(v, Hole):
            raise CompileError("cannot evaluate a pre-term with unfilled holes")
        raise CompileError(f"not a value: {v!r}")

    def term(self, t, scope):
        if isinstance(t, Val):
            return (T_VAL, self.value(t.value, scope))
        if isinstance(t, Sample):
            return (T_SAMPLE,)
        if isinstance(t, PrimC):
            fn = self.reg.get(t.name).scalar
            return (T_PRIMC, fn, tuple(self.value(a, scope) for a in t.args))
        if isinstance(t, PrimB):
            fn = self.reg.get(t.name).scalar
            return (T_PRIMB, fn, tuple(self.value(a, scope) for a in t.args))
        if isinstance(t, Case):
            arms = {tag: self.term(body, scope + (x,)) for tag, x, body in t.branches}
            return (T_CASE, self.value(t.scrutinee, scope), arms)
        if isinstance(t, App):
            return (T_APP, self.value(t.fun, scope), self.value(t.arg, scope))
        if isinstance(t, Let):
            return (T_LET, self.term(t.bound, scope), self.term(t.body, scope + (t.var,)))
        if isinstance(t, Unfold):
            return (T_UNFOLD, self.value(t.value, scope))
        if isinstance(t, CtxHole):
            raise CompileError("cannot evaluate a context with an unfilled hole")
        if isinstance(t, (Var, RealLit, Inj, Lam, Fold, Hole)):
            return (T_VAL, self.value(t, scope))
        raise CompileError(f"not a term: {t!r}")


@lru_cache(maxsize=512)
def _compile_cached(term, mode: str, leq_eps: float):
    return _Compiler(registry_for(mode, leq_eps)).term(term, ())


def compile_term(term, registry: Optional[PrimRegistry] = None, scope: Tuple[str, ...] = ()):
    reg = registry or registry_for(FULL)
    if not scope and reg is registry_for(reg.mode, reg.leq_eps):
        return _compile_cached(term, reg.mode, reg.leq_eps)
    return _Compiler(reg).term(term, scope)


def compile_value(value, registry: Optional[PrimRegistry] = None, scope: Tuple[str, ...] = ()):
    return _Compiler(registry or registry_for(FULL)).value(value, scope)


_UNIT_LAM = Lam("u", VOID, Val(Var("u")))
UNIT_V = Closure((T_VAL, (V_VAR, 0)), (), LamInfo(_UNIT_LAM, ()))
TRUE_V = InjV("true", UNIT_V, BOOL)
FALSE_V = InjV("false", UNIT_V, BOOL)


def ev(c, env):
    """Evaluate value code under a runtime environment."""
    op = c[0]
    if op == V_VAR:
        return env[c[1]]
    if op == V_REAL:
        return c[1]
    if op == V_LAM:
        return Closure(c[1], env, c[2])
    if op == V_INJ:
        return InjV(c[1], ev(c[2], env), c[3])
    return FoldV(ev(c[1], env), c[2])


def to_runtime(value, registry: Optional[PrimRegistry] = None):
    """Runtime value of a closed syntactic value."""
    return ev(compile_value(value, registry), ())


# -- running ------------------------------------------------------------------


@dataclass(frozen=True)
class Converged:
    raw: object
    depth: int

    @property
    def value(self):
        return readback(self.raw)

    def __str__(self):
        return show_value(self.raw)


@dataclass(frozen=True)
class FuelExhausted:
    def __str__(self):
        return "diverged (fuel exhausted)"


EXHAUSTED = FuelExhausted()


def run_code(code, env, fuel: int, draw):
    """Run compiled term code. ``draw`` is a zero-argument callable
    returning a uniform in (0, 1). Returns ``(value, depth)`` or ``None``
    when the fuel is exhausted."""
    stack = []
    push = stack.append
    pop = stack.pop
    r = fuel
    c = 0
    depth = 0
    while True:
        if r < 1:
            return None
        op = code[0]
        if op == T_LET:
            r -= 1
            c += 1
            push((code[2], env, r, c))
            code = code[1]
            continue
        if op == T_APP:
            f = ev(code[1], env)
            a = ev(code[2], env)
            code = f.code
            env = f.env + (a,)
            r -= 1
            c += 1
            continue
        if op == T_VAL:
            v = ev(code[1], env)
            d = c + 1
        elif op == T_SAMPLE:
            v = draw()
            d = c + 1
        elif op == T_CASE:
            s = ev(code[1], env)
            code = code[2][s.tag]
            env = env + (s.v,)
            r -= 1
            c += 1
            continue
        elif op == T_PRIMC:
            if r < 2:
                return None
            v = float(code[1](*[ev(a, env) for a in code[2]]))
            d = c + 2
        elif op == T_PRIMB:
            if r < 2:
                return None
            v = TRUE_V if code[1](*[ev(a, env) for a in code[2]]) else FALSE_V
            d = c + 2
        else:  # T_UNFOLD
            if r < 2:
                return None
            v = ev(code[1], env).v
            d = c + 2
        if d > depth:
            depth = d
        if not stack:
            return v, depth
        code, env, r, c = pop()
        env = env + (v,)


def eval_sample(program, fuel: int, rng, registry: Optional[PrimRegistry] = None):
    """One run of ``program`` with step index ``fuel``, drawing from
    ``rng``. Returns :class:`Converged` or :data:`EXHAUSTED`."""
    if fuel < 0:
        raise ValueError("fuel must be nonnegative")
    code = compile_term(program, registry)
    out = run_code(code, (), int(fuel), rng.uniform)
    if out is None:
        return EXHAUSTED
    return Converged(out[0], out[1])


def apply_runtime(fun, arg, fuel: int, draw):
    """Run the application ``fun arg`` of runtime values (one clause plus
    the body)."""
    if fuel < 1:
        return None
    out = run_code(fun.code, fun.env + (arg,), fuel - 1, draw)
    if out is None:
        return None
    return out[0], out[1] + 1
