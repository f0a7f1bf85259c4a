"""Derived forms elaborated into core syntax: probabilistic choice, Gaussian
sampling and recursion through iso-recursive types."""

from __future__ import annotations

import math
from itertools import count

from .parser import FALSE, TRUE, if_then_else
from .terms import App, Fold, Lam, Let, PrimB, PrimC, RealLit, Sample, Unfold, Val, Var, as_term
from .types import REAL, Arrow, Mu, TVar, Type

__all__ = [
    "TRUE", "FALSE", "if_then_else", "bernoulli_term", "bernoulli", "choice",
    "normal_std", "normal", "fixpoint", "omega",
]


class _Names:
    def __init__(self, stem: str = "_s"):
        self._c = count(1)
        self.stem = stem

    def __call__(self, base: str) -> str:
        return f"{self.stem}{base}{next(self._c)}"


def _seq(steps, result):
    """Chain ``let x1 = t1 in ... in result``."""
    out = result
    for x, t in reversed(steps):
        out = Let(x, t, out)
    return out


def bernoulli_term(sigma: Type) -> Lam:
    """``lam m n p. let x = sample in if x > p then n else m`` at type
    sigma -> sigma -> real -> sigma."""
    body = Let("x", Sample(), Let("b", PrimB("lt", (Var("p"), Var("x"))),
                                  if_then_else(Var("b"), Val(Var("n")), Val(Var("m")), "u")))
    return Lam("m", sigma, Val(Lam("n", sigma, Val(Lam("p", REAL, body)))))


def bernoulli(sigma: Type, m, n, p):
    """The application ``bernoulli m n p`` to three terms (each let-bound
    first, left to right)."""
    fresh = _Names("_bern")
    xm, xn, xp, f1, f2 = (fresh(s) for s in ("m", "n", "p", "f", "g"))
    return _seq([(xm, as_term(m)), (xn, as_term(n)), (xp, as_term(p)),
                       (f1, App(bernoulli_term(sigma), Var(xm))),
                       (f2, App(Var(f1), Var(xn)))],
                App(Var(f2), Var(xp)))


def choice(sigma: Type, m, n):
    """Fair choice between two terms of type sigma."""
    return bernoulli(sigma, m, n, RealLit(0.5))


def normal_std():
    """Box-Muller: ``let x = sample in let y = sample in
    sqrt(-2 log x) * cos(2 pi y)``."""
    steps = [
        ("x", Sample()),
        ("y", Sample()),
        ("l", PrimC("log", (Var("x"),))),
        ("a", PrimC("times", (RealLit(-2.0), Var("l")))),
        ("s", PrimC("sqrt", (Var("a"),))),
        ("t", PrimC("times", (RealLit(2 * math.pi), Var("y")))),
        ("c", PrimC("cos", (Var("t"),))),
    ]
    return _seq(steps, PrimC("times", (Var("s"), Var("c"))))


def normal(mu, sd):
    """``let xm = mu in let xs = sd in let y = normal_std in xs * y + xm``."""
    steps = [
        ("xm", as_term(mu)),
        ("xs", as_term(sd)),
        ("y", normal_std()),
        ("p", PrimC("times", (Var("xs"), Var("y")))),
    ]
    return _seq(steps, PrimC("plus", (Var("p"), Var("xm"))))


def _self_type(result: Type, var: str = "d") -> Mu:
    return Mu(var, Arrow(TVar(var), result))


def fixpoint(functional, dom: Type, cod: Type):
    """Call-by-value fixpoint of ``functional : (dom -> cod) -> (dom -> cod)``
    through ``D = mu d. d -> (dom -> cod)``; evaluates to a function value."""
    fn = Arrow(dom, cod)
    D = _self_type(fn)
    inner = Lam("a", dom, _seq([
        ("g", Unfold(Var("x"))),
        ("h", App(Var("g"), Var("x"))),
        ("k", App(Var("f"), Var("h"))),
    ], App(Var("k"), Var("a"))))
    w = Lam("x", D, Val(inner))
    return Let("f", as_term(functional), Let("w", Val(w), App(Var("w"), Fold(Var("w"), D))))


def omega(sigma: Type = REAL):
    """The diverging term of type sigma: ``w (fold w)`` with
    ``w = lam x. (unfold x) x``."""
    D = _self_type(sigma)
    w = Lam("x", D, Let("g", Unfold(Var("x")), App(Var("g"), Var("x"))))
    return Let("w", Val(w), App(Var("w"), Fold(Var("w"), D)))
