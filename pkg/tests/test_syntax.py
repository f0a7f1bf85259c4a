import math
import random

import pytest
from hypothesis import given, settings, strategies as st

from lmplambda.semantics.generate import _Gen, random_program
from lmplambda.syntax import (
    BOOL, CONTINUOUS, FULL, REAL, UNIT, VOID, Arrow, Lam, Let, ParseError, RealLit, Sample, Sum,
    TypeCheckError, Val, Var, factorize, fill, parse, parse_type, parse_value, show, substitute,
    typecheck,
)
from lmplambda.syntax.preterm import hole_order
from lmplambda.syntax.sugar import if_then_else, normal_std
from lmplambda.syntax.types import types_equal


def test_parse_basic_forms():
    assert parse("sample") == Sample()
    assert parse("let x = sample in x") == Let("x", Sample(), Val(Var("x")))


def test_parsing_is_scope_free():
    t = parse("lam x: real. y")
    with pytest.raises(TypeCheckError, match="unbound"):
        typecheck(None, t)


def test_parse_errors_have_positions():
    with pytest.raises(ParseError, match="1:7"):
        parse("lam x real. x")


def test_comments_are_ignored():
    assert parse("-- a comment\nsample -- trailing\n") == Sample()


@pytest.mark.parametrize("src,ty", [
    ("lam x: real. x", Arrow(REAL, REAL)),
    ("sample", REAL),
    ("(lam x: real. x) 3.0", REAL),
    ("inj<sum {a: real, b: real}> a 1.0", Sum((("a", REAL), ("b", REAL)))),
])
def test_typecheck_examples(src, ty):
    assert types_equal(typecheck(None, parse(src)), ty)


def test_argument_mismatch():
    with pytest.raises(TypeCheckError, match="argument type mismatch"):
        typecheck(None, parse("(lam x: real. x) (lam y: real. y)"))


def test_sugar_types():
    assert VOID == Sum(())
    assert UNIT == Arrow(VOID, VOID)
    assert [t for t, _ in BOOL.branches] == ["false", "true"]
    assert types_equal(parse_type("mu t. sum {nil: real, cons: t}"),
                       parse_type("mu s. sum {cons: s, nil: real}"))


def test_substitution_examples():
    assert show(substitute(parse("x 3.0"), "x", parse_value("lam y: real. y"))) == "(lam y: real. y) 3.0"
    assert show(substitute(parse("lam x: real. x"), "x", parse_value("1.0"))) == "lam x: real. x"
    # the binder is renamed so that the free y of the argument is not captured
    out = substitute(parse("lam y: real. x"), "x", parse_value("lam z: real. y"))
    assert isinstance(out.value, Lam) and out.value.var != "y"
    assert show(out.value.body) == "lam z: real. y"


@pytest.mark.parametrize("src,pre,reals", [
    ("sin(3.0)", "sin([#1])", [3.0]),
    ("plus(0.5, 0.25)", "plus([#1], [#2])", [0.5, 0.25]),
    ("sample", "sample", []),
])
def test_factorize_examples(src, pre, reals):
    p, r = factorize(parse(src))
    assert str(p) == pre
    assert list(r) == reals
    assert fill(p, r) == parse(src)


def test_fill_examples():
    p, _ = factorize(parse("plus(0.5, 0.25)"))
    assert show(fill(p, [1.0, 2.0])) == "plus(1.0, 2.0)"
    with pytest.raises(ValueError):
        fill(p, [1.0])


def test_if_then_else_is_a_case_on_bool():
    t = if_then_else(parse_value("inj<sum {false: (sum {} -> sum {}), true: (sum {} -> sum {})}> true "
                                 "(lam u: sum {}. u)"), parse("1.0"), parse("0.0"))
    assert "case" in show(t)
    assert types_equal(typecheck(None, t), REAL)


def test_normal_std_uses_two_draws():
    assert show(normal_std()).count("sample") == 2


def test_mode_gate():
    for src, cont_ok in [("plus(1.0, 2.0)", True), ("step(0.0)", False),
                         ("if eq(1.0, 2.0) then 1.0 else 0.0", False), ("leq(0.0, 1.0)", True)]:
        t = parse(src)
        typecheck(None, t, mode=FULL)
        if cont_ok:
            typecheck(None, t, mode=CONTINUOUS)
        else:
            with pytest.raises(TypeCheckError):
                typecheck(None, t, mode=CONTINUOUS)


# -- properties on generated programs


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 2 ** 32), st.integers(1, 6), st.data())
def test_fill_factorize_round_trip(seed, depth, data):
    t = random_program(random.Random(seed), depth)
    pre, reals = factorize(t)
    assert fill(pre, reals) == t
    assert hole_order(pre.skeleton) == list(range(1, pre.hole_count + 1))
    new = data.draw(st.lists(st.floats(-1e6, 1e6, allow_nan=False), min_size=pre.hole_count,
                             max_size=pre.hole_count))
    pre2, reals2 = factorize(fill(pre, new))
    assert pre2 == pre
    assert [float(x) for x in reals2] == [float(x) for x in new]


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 2 ** 32), st.integers(0, 5), st.floats(-10, 10, allow_nan=False))
def test_substitution_preserves_types(seed, depth, r):
    g = _Gen(random.Random(seed), None)
    body = g.term(depth, ["v"])
    ty = typecheck({"v": REAL}, body)
    out = substitute(body, "v", RealLit(r))
    assert types_equal(typecheck(None, out), ty)


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 2 ** 32))
def test_generated_programs_print_and_reparse(seed):
    t = random_program(random.Random(seed), 4)
    assert parse(show(t)) == t
    assert not math.isnan(float(len(show(t))))
