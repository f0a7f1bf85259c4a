"""Concrete syntax.

Grammar (one program per ``.lp`` file, ``--`` starts a comment)::

    type ::= "real" | "void" | "unit" | "bool" | ident | "(" type ")"
           | type "->" type | "sum" "{" tag ":" type ("," tag ":" type)* "}"
           | "mu" ident "." type
    term ::= "sample" | literal | ident | "lam" ident ":" type "." term
           | term term | "let" ident "=" term "in" term
           | "inj" "<" type ">" tag term | "fold" "<" type ">" term | "unfold" term
           | "case" term "{" tag ident "=>" term ("|" tag ident "=>" term)* "}"
           | prim "(" term ("," term)* ")"
           | "if" term "then" term "else" term | "true" | "false" | "unit"
           | "bernoulli" "(" term "," term "," term ")" | "[.]" | "[#" n "]"

Wherever the core calculus demands a value but a general term is written,
the term is let-bound first, left to right (``M N`` becomes
``let f = M in let a = N in f a``). Printing always produces core syntax,
so ``parse(show(t)) == t``.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Callable, List, Optional

from .prims import PrimRegistry, default_registry
from .terms import (
    App, Case, CtxHole, Fold, Hole, Inj, Lam, Let, PrimB, PrimC, RealLit, Sample,
    Term, Unfold, Val, Var, is_value,
)
from .types import BOOL, REAL, UNIT, VOID, Arrow, Mu, Sum, TVar, Type


class ParseError(ValueError):
    def __init__(self, message: str, line: int = 0, col: int = 0):
        super().__init__(f"{line}:{col}: {message}" if line else message)
        self.line = line
        self.col = col


KEYWORDS = {
    "sample", "lam", "let", "in", "inj", "case", "fold", "unfold", "real", "sum", "mu",
    "if", "then", "else", "true", "false", "unit", "void", "bool", "bernoulli",
}

_TOKEN = re.compile(
    r"""
    (?P<ws>[ \t\r\n]+|--[^\n]*)
  | (?P<num>-?\d+(?:\.\d*)?(?:[eE][-+]?\d+)?)
  | (?P<ident>[A-Za-z_][A-Za-z0-9_']*)
  | (?P<ctxhole>\[\.\])
  | (?P<hole>\[\#\d+\])
  | (?P<sym>=>|->|[(){}:.,=|<>])
    """,
    re.VERBOSE,
)


@dataclass
class Token:
    kind: str
    text: str
    line: int
    col: int
    adjacent: bool  # no whitespace before this token


def tokenize(src: str) -> List[Token]:
    out: List[Token] = []
    pos, line, line_start = 0, 1, 0
    prev_end = -1
    while pos < len(src):
        m = _TOKEN.match(src, pos)
        if not m:
            raise ParseError(f"unexpected character {src[pos]!r}", line, pos - line_start + 1)
        kind = m.lastgroup
        text = m.group()
        if kind != "ws":
            if kind == "ident" and text in KEYWORDS:
                kind = "kw"
            out.append(Token(kind, text, line, pos - line_start + 1, adjacent=(pos == prev_end)))
            prev_end = m.end()
        nl = text.count("\n")
        if nl:
            line += nl
            line_start = pos + text.rfind("\n") + 1
        pos = m.end()
    out.append(Token("eof", "", line, pos - line_start + 1, False))
    return out


_UNIT_VALUE = Lam("u", VOID, Val(Var("u")))
TRUE = Inj("true", _UNIT_VALUE, BOOL)
FALSE = Inj("false", _UNIT_VALUE, BOOL)

_TERM_STOP = {"in", "then", "else", "|", "}", ")", ",", "eof", ">"}


class Parser:
    def __init__(self, src: str, registry: Optional[PrimRegistry] = None):
        self.toks = tokenize(src)
        self.i = 0
        self.registry = registry or default_registry()
        self._avoid = {t.text for t in self.toks if t.kind == "ident"}
        self._counter = 0

    # -- token helpers --------------------------------------------------------

    @property
    def tok(self) -> Token:
        return self.toks[self.i]

    def error(self, msg: str, tok: Optional[Token] = None) -> ParseError:
        tok = tok or self.tok
        return ParseError(msg, tok.line, tok.col)

    def at(self, text: str) -> bool:
        t = self.tok
        return t.kind in ("sym", "kw") and t.text == text

    def expect(self, text: str) -> Token:
        if not self.at(text):
            found = self.tok.text or "end of input"
            raise self.error(f"expected {text!r}, found {found!r}")
        return self.advance()

    def advance(self) -> Token:
        t = self.tok
        self.i += 1
        return t

    def ident(self) -> str:
        t = self.tok
        if t.kind != "ident":
            raise self.error(f"expected identifier, found {t.text or 'end of input'!r}")
        self.i += 1
        return t.text

    def tag(self) -> str:
        # sum tags live in their own namespace, so keywords are allowed
        t = self.tok
        if t.kind not in ("ident", "kw"):
            raise self.error(f"expected a tag, found {t.text or 'end of input'!r}")
        self.i += 1
        return t.text

    def fresh(self, stem: str = "_v") -> str:
        while True:
            self._counter += 1
            name = f"{stem}{self._counter}"
            if name not in self._avoid:
                self._avoid.add(name)
                return name

    # -- elaboration ----------------------------------------------------------

    def valueize(self, t: Term, k: Callable) -> Term:
        if isinstance(t, Val):
            return k(t.value)
        name = self.fresh()
        return Let(name, t, k(Var(name)))

    def valueize_all(self, ts: List[Term], k: Callable) -> Term:
        def go(i, acc):
            if i == len(ts):
                return k(acc)
            return self.valueize(ts[i], lambda v: go(i + 1, acc + [v]))

        return go(0, [])

    # -- types ----------------------------------------------------------------

    def parse_type(self) -> Type:
        t = self.type_atom()
        if self.at("->"):
            self.advance()
            return Arrow(t, self.parse_type())
        return t

    def type_atom(self) -> Type:
        t = self.tok
        if self.at("real"):
            self.advance()
            return REAL
        if self.at("void"):
            self.advance()
            return VOID
        if self.at("unit"):
            self.advance()
            return UNIT
        if self.at("bool"):
            self.advance()
            return BOOL
        if self.at("("):
            self.advance()
            ty = self.parse_type()
            self.expect(")")
            return ty
        if self.at("sum"):
            self.advance()
            self.expect("{")
            branches = []
            if not self.at("}"):
                while True:
                    tag = self.tag()
                    self.expect(":")
                    branches.append((tag, self.parse_type()))
                    if not self.at(","):
                        break
                    self.advance()
            self.expect("}")
            try:
                return Sum(tuple(branches))
            except ValueError as e:
                raise self.error(str(e), t) from None
        if self.at("mu"):
            self.advance()
            var = self.ident()
            self.expect(".")
            return Mu(var, self.parse_type())
        if t.kind == "ident":
            self.advance()
            return TVar(t.text)
        raise self.error(f"expected a type, found {t.text or 'end of input'!r}")

    def annotation(self) -> Type:
        self.expect("<")
        ty = self.parse_type()
        self.expect(">")
        return ty

    # -- terms ----------------------------------------------------------------

    def parse_term(self) -> Term:
        if self.at("let"):
            self.advance()
            x = self.ident()
            self.expect("=")
            bound = self.parse_term()
            self.expect("in")
            return Let(x, bound, self.parse_term())
        if self.at("lam"):
            self.advance()
            x = self.ident()
            self.expect(":")
            ty = self.parse_type()
            self.expect(".")
            return Val(Lam(x, ty, self.parse_term()))
        if self.at("if"):
            self.advance()
            cond = self.parse_term()
            self.expect("then")
            t1 = self.parse_term()
            self.expect("else")
            t2 = self.parse_term()
            return self.valueize(cond, lambda v: if_then_else(v, t1, t2, self.fresh("_u")))
        return self.parse_app()

    def _starts_prefix(self) -> bool:
        t = self.tok
        if t.kind == "eof":
            return False
        if t.kind in ("sym", "kw") and t.text in _TERM_STOP:
            return False
        if t.kind == "sym" and t.text not in ("(",):
            return False
        return True

    def parse_app(self) -> Term:
        items = [self.parse_prefix()]
        while self._starts_prefix():
            if self.at("lam") or self.at("let") or self.at("if"):
                items.append(self.parse_term())
                break
            items.append(self.parse_prefix())
        acc = items[0]
        for arg in items[1:]:
            acc = self._mk_app(acc, arg)
        return acc

    def _mk_app(self, f: Term, a: Term) -> Term:
        return self.valueize(f, lambda fv: self.valueize(a, lambda av: App(fv, av)))

    def parse_prefix(self) -> Term:
        t = self.tok
        if self.at("inj"):
            self.advance()
            ty = self.annotation()
            if not isinstance(ty, Sum):
                raise self.error("inj annotation must be a sum type", t)
            tag = self.tag()
            if tag not in ty.tags:
                raise self.error(f"tag {tag!r} not in {ty}", t)
            inner = self.parse_prefix()
            return self.valueize(inner, lambda v: Val(Inj(tag, v, ty)))
        if self.at("fold"):
            self.advance()
            ty = self.annotation()
            if not isinstance(ty, Mu):
                raise self.error("fold annotation must be a recursive type", t)
            inner = self.parse_prefix()
            return self.valueize(inner, lambda v: Val(Fold(v, ty)))
        if self.at("unfold"):
            self.advance()
            inner = self.parse_prefix()
            return self.valueize(inner, lambda v: Unfold(v))
        if self.at("case"):
            self.advance()
            scrut = self.parse_prefix()
            self.expect("{")
            arms = []
            if self.at("|"):
                self.advance()
            while True:
                tag = self.tag()
                var = self.ident()
                self.expect("=>")
                arms.append((tag, var, self.parse_term()))
                if not self.at("|"):
                    break
                self.advance()
            self.expect("}")
            tags = [a[0] for a in arms]
            if len(set(tags)) != len(tags):
                raise self.error("duplicate case branch", t)
            return self.valueize(scrut, lambda v: Case(v, tuple(arms)))
        return self.parse_atom()

    def parse_atom(self) -> Term:
        t = self.tok
        if t.kind == "num":
            self.advance()
            return Val(RealLit(float(t.text)))
        if t.kind == "ctxhole":
            self.advance()
            return CtxHole()
        if t.kind == "hole":
            self.advance()
            return Val(Hole(int(t.text[2:-1])))
        if t.kind == "ident":
            nxt = self.toks[self.i + 1]
            if nxt.kind == "sym" and nxt.text == "(" and nxt.adjacent:
                return self.parse_prim()
            self.advance()
            return Val(Var(t.text))
        if self.at("sample"):
            self.advance()
            return Sample()
        if self.at("true"):
            self.advance()
            return Val(TRUE)
        if self.at("false"):
            self.advance()
            return Val(FALSE)
        if self.at("unit"):
            self.advance()
            return Val(_UNIT_VALUE)
        if self.at("bernoulli"):
            self.advance()
            self.expect("(")
            args = self._arglist()
            if len(args) != 3:
                raise self.error("bernoulli takes three arguments", t)
            return self.valueize_all(args, lambda vs: bernoulli_apply(vs[0], vs[1], vs[2], self.fresh))
        if self.at("("):
            self.advance()
            inner = self.parse_term()
            self.expect(")")
            return inner
        raise self.error(f"unexpected {t.text or 'end of input'!r}")

    def _arglist(self) -> List[Term]:
        args = [self.parse_term()]
        while self.at(","):
            self.advance()
            args.append(self.parse_term())
        self.expect(")")
        return args

    def parse_prim(self) -> Term:
        t = self.advance()
        name = t.text
        if name not in self.registry:
            raise self.error(f"unknown primitive {name!r}", t)
        prim = self.registry.get(name)
        self.expect("(")
        args = self._arglist()
        if len(args) != prim.arity:
            raise self.error(f"primitive {name!r} expects {prim.arity} arguments, got {len(args)}", t)
        node = PrimB if prim.boolean else PrimC
        return self.valueize_all(args, lambda vs: node(name, tuple(vs)))

    def parse_program(self) -> Term:
        term = self.parse_term()
        if self.tok.kind != "eof":
            raise self.error(f"unexpected trailing input {self.tok.text!r}")
        return term


def if_then_else(cond, then_t: Term, else_t: Term, binder: str = "_u") -> Term:
    return Case(cond, (("false", binder, else_t), ("true", binder, then_t)))


def bernoulli_apply(m, n, p, fresh) -> Term:
    """``bernoulli m n p`` after beta-reducing the three arguments:
    ``let x = sample in if x > p then n else m``."""
    x = fresh("_x")
    b = fresh("_b")
    return Let(x, Sample(), Let(b, PrimB("lt", (p, Var(x))), if_then_else(Var(b), Val(n), Val(m), fresh("_u"))))


def parse(src: str, registry: Optional[PrimRegistry] = None) -> Term:
    return Parser(src, registry).parse_program()


def parse_value(src: str, registry: Optional[PrimRegistry] = None):
    t = parse(src, registry)
    if not isinstance(t, Val):
        raise ParseError(f"expected a value, got a computation: {src!r}")
    return t.value


def parse_type(src: str) -> Type:
    p = Parser(src)
    ty = p.parse_type()
    if p.tok.kind != "eof":
        raise p.error(f"unexpected trailing input {p.tok.text!r}")
    return ty
