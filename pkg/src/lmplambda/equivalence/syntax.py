"""Modal formulas and tests, with their textual syntax.

Formulas: ``T``, ``(f & g)``, ``<a>_q f`` (q a rational in [0, 1]).
Tests: ``w``, ``a.t``, ``(t & t)``.

Labels are plain strings for finite LMPs; on the applicative LMP they are
action objects and print as ``eval``, ``leq:1/2``, ``pass:{V}``,
``case:i``, ``unbox`` or ``type:σ``. Label text ends at the first ``.``
(for tests) or ``>`` (for formulas) outside braces.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Optional, Tuple


def _label_text(a) -> str:
    return a.text if hasattr(a, "text") else str(a)


# -- formulas ---------------------------------------------------------------------


@dataclass(frozen=True)
class Top:
    def __str__(self):
        return "T"

    @property
    def depth(self):
        return 0


@dataclass(frozen=True)
class And:
    left: object
    right: object

    def __str__(self):
        return f"({self.left} & {self.right})"

    @property
    def depth(self):
        return max(self.left.depth, self.right.depth)


@dataclass(frozen=True)
class Diamond:
    label: object
    q: Fraction
    body: object

    def __post_init__(self):
        q = Fraction(self.q)
        if not 0 <= q <= 1:
            raise ValueError(f"threshold {q} outside [0, 1]")
        object.__setattr__(self, "q", q)

    def __str__(self):
        return f"<{_label_text(self.label)}>_{self.q} {self.body}"

    @property
    def depth(self):
        return 1 + self.body.depth


TOP = Top()


# -- tests --------------------------------------------------------------------------


@dataclass(frozen=True)
class Omega:
    def __str__(self):
        return "w"

    @property
    def size(self):
        return 1

    @property
    def depth(self):
        return 0


@dataclass(frozen=True)
class Act:
    label: object
    then: object

    def __str__(self):
        return f"{_label_text(self.label)}.{self.then}"

    @property
    def size(self):
        return 1 + self.then.size

    @property
    def depth(self):
        return 1 + self.then.depth


@dataclass(frozen=True)
class Conj:
    left: object
    right: object

    def __str__(self):
        return f"({self.left} & {self.right})"

    @property
    def size(self):
        return 1 + self.left.size + self.right.size

    @property
    def depth(self):
        return max(self.left.depth, self.right.depth)


OMEGA = Omega()


def test_labels(t) -> list:
    if isinstance(t, Omega):
        return []
    if isinstance(t, Act):
        return [t.label] + test_labels(t.then)
    return test_labels(t.left) + test_labels(t.right)


# -- parsing ------------------------------------------------------------------------


class SyntaxError_(ValueError):
    pass


class _Reader:
    def __init__(self, text: str, label: Callable[[str], object]):
        self.s = text
        self.i = 0
        self.label = label

    def ws(self):
        while self.i < len(self.s) and self.s[self.i].isspace():
            self.i += 1

    def peek(self) -> str:
        self.ws()
        return self.s[self.i] if self.i < len(self.s) else ""

    def eat(self, ch: str):
        if self.peek() != ch:
            raise SyntaxError_(f"expected {ch!r} at position {self.i} in {self.s!r}")
        self.i += 1

    def until(self, stops: str) -> str:
        self.ws()
        start = self.i
        depth = 0
        while self.i < len(self.s):
            c = self.s[self.i]
            if c == "{":
                depth += 1
            elif c == "}":
                depth -= 1
            elif depth == 0 and c in stops:
                break
            self.i += 1
        text = self.s[start:self.i].strip()
        if not text:
            raise SyntaxError_(f"empty label at position {start} in {self.s!r}")
        return text

    def done(self):
        if self.peek():
            raise SyntaxError_(f"trailing input at position {self.i} in {self.s!r}")

    # tests
    def test(self):
        c = self.peek()
        if c == "(":
            self.eat("(")
            left = self.test()
            self.eat("&")
            right = self.test()
            self.eat(")")
            return Conj(left, right)
        save = self.i
        word = self.until(".&)")
        if word == "w" and self.peek() != ".":
            return OMEGA
        if self.peek() != ".":
            self.i = save
            raise SyntaxError_(f"expected '.' after label {word!r} in {self.s!r}")
        self.eat(".")
        return Act(self.label(word), self.test())

    # formulas
    def formula(self):
        c = self.peek()
        if c == "(":
            self.eat("(")
            left = self.formula()
            self.eat("&")
            right = self.formula()
            self.eat(")")
            return And(left, right)
        if c == "<":
            self.eat("<")
            lab = self.until(">")
            self.eat(">")
            self.eat("_")
            self.ws()
            start = self.i
            while self.i < len(self.s) and not self.s[self.i].isspace():
                self.i += 1
            try:
                q = Fraction(self.s[start:self.i])
            except (ValueError, ZeroDivisionError):
                raise SyntaxError_(f"bad threshold {self.s[start:self.i]!r}") from None
            return Diamond(self.label(lab), q, self.formula())
        if c == "T":
            self.i += 1
            return TOP
        raise SyntaxError_(f"unexpected {c!r} at position {self.i} in {self.s!r}")


def parse_test(text: str, label: Optional[Callable[[str], object]] = None):
    r = _Reader(text, label or (lambda s: s))
    t = r.test()
    r.done()
    return t


def parse_formula(text: str, label: Optional[Callable[[str], object]] = None):
    r = _Reader(text, label or (lambda s: s))
    f = r.formula()
    r.done()
    return f


def conjuncts(t) -> Tuple:
    if isinstance(t, Conj):
        return conjuncts(t.left) + conjuncts(t.right)
    return (t,)
