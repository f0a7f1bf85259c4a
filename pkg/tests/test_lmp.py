import json
import random
from fractions import Fraction as F

import pytest
from hypothesis import given, settings, strategies as st

from lmplambda.lmp import (
    DEFAULT_RATIONALS, EVAL, NULL, UNBOX, CaseProbe, DiracTo, EvalMeasure, FiniteLMP, LeqTest,
    LMPFormatError, PassValue, TermState, TypeLoop, ValueState, WeightedDirac, app_step, as_fraction,
    enabled_actions, finite_lmp_from_json, load_finite_lmp, make_state, parse_action,
    rational_label_family, values_of_type,
)
from lmplambda.semantics.generate import random_program
from lmplambda.semantics.rng import RngStream
from lmplambda.syntax import REAL, Arrow, Mu, Sum, parse, parse_type, parse_value, show, types_equal


def test_self_loop_lmp():
    l = FiniteLMP(["s"], ["a"], {"a": [[1]]})
    assert l.row("a", "s") == (F(1),)
    assert l.h("a", "s").total == 1


def test_row_sum_above_one_is_rejected():
    with pytest.raises(LMPFormatError):
        FiniteLMP(["s", "t"], ["a"], {"a": [[0.6, 0.6], [0, 0]]})


@pytest.mark.parametrize("data", [
    {"states": ["s"], "labels": ["a"]},
    {"states": ["s"], "labels": ["a"], "kernels": {"a": [[1, 0]]}},
    {"states": ["s"], "labels": ["a"], "kernels": {"b": [[1]]}},
    {"states": ["s"], "labels": ["a"], "kernels": {"a": [[-0.5]]}},
    {"states": ["s", "s"], "labels": ["a"], "kernels": {"a": [[0, 0], [0, 0]]}},
])
def test_schema_violations(data):
    with pytest.raises(LMPFormatError):
        finite_lmp_from_json(data)


def test_json_round_trip(tmp_path):
    l = FiniteLMP(["s", "t"], ["a", "b"], {"a": [["1/3", "2/3"], [0, 0]], "b": [[0.25, 0], [0, 1]]})
    p = tmp_path / "l.json"
    p.write_text(json.dumps(l.to_json()))
    m = load_finite_lmp(p)
    assert m.to_json() == l.to_json()
    assert m.row("a", "s") == (F(1, 3), F(2, 3))


def test_as_fraction_reads_decimals():
    assert as_fraction(0.1) == F(1, 10)
    assert as_fraction("3/8") == F(3, 8)


def test_counter_example_loads():
    from lmplambda.equivalence.corpus import corpus_lmp

    l = corpus_lmp("counter_example.json")
    assert {"M", "N"} <= set(l.states)
    assert l.h("eval", "M").total == 1 and l.h("eval", "N").total == 1


# -- applicative LMP


def test_step_examples():
    three = make_state(parse("3.0"))
    assert isinstance(three, ValueState)
    st5 = app_step(three, LeqTest(F(5)))
    assert isinstance(st5, WeightedDirac) and st5.weight == 1.0 and st5.target == three
    assert app_step(three, LeqTest(F(1))).weight == 0.0
    assert app_step(three, EVAL) == DiracTo(three)
    assert app_step(three, CaseProbe("a")) is NULL
    ident = make_state(parse("lam x: real. x"))
    out = app_step(ident, PassValue(parse_value("2.0"), REAL))
    assert isinstance(out, DiracTo) and isinstance(out.target, TermState)
    assert show(out.target.term) == "(lam x: real. x) 2.0" and types_equal(out.target.type, REAL)


def test_eval_on_terms_is_a_sampling_handle():
    s = make_state(parse("sample"))
    h = app_step(s, EVAL)
    assert isinstance(h, EvalMeasure)
    v = h.sample(RngStream(0))
    assert isinstance(v, ValueState) and 0 < v.value.value < 1
    assert app_step(make_state(parse("3.0")), EVAL) == DiracTo(make_state(parse("3.0")))


def test_type_loop_and_structural_steps():
    f = make_state(parse("lam x: real. x"))
    assert app_step(f, TypeLoop(Arrow(REAL, REAL))) == DiracTo(f)
    assert app_step(f, TypeLoop(REAL)) is NULL
    inj = make_state(parse("inj<sum {a: real, b: real}> a 1.0"))
    assert app_step(inj, CaseProbe("a")).target.type == REAL
    assert app_step(inj, CaseProbe("b")) is NULL
    box = make_state(parse("fold<mu t. real> 2.0"))
    assert show(app_step(box, UNBOX).target.value) == "2.0"
    assert app_step(box, EVAL) == DiracTo(box)


def test_weighted_dirac_weight_is_checked():
    s = make_state(parse("1.0"))
    with pytest.raises(ValueError):
        WeightedDirac(1.5, s)


def test_parse_action_round_trip():
    for a in rational_label_family(1, types=(REAL, Arrow(REAL, REAL))):
        assert parse_action(a.text) == a


def test_family_at_real_to_real():
    vals = [show(v) for _, v in values_of_type(Arrow(REAL, REAL), 1)]
    for want in ("lam x0: real. 0.0", "lam x0: real. 1.0", "lam x0: real. x0"):
        assert want in vals
    passes = [a for a in rational_label_family(1, types=(Arrow(REAL, REAL),)) if isinstance(a, PassValue)]
    assert len(passes) == 6


def test_empty_rationals_depth_zero():
    acts = list(rational_label_family(0, [], types=(Arrow(REAL, REAL),)))
    assert acts == [EVAL, UNBOX, TypeLoop(Arrow(REAL, REAL))]
    assert enabled_actions("value", REAL, 0, []) == []


rationals = st.lists(st.fractions(0, 1, max_denominator=8), max_size=4)
types = st.sampled_from([REAL, Arrow(REAL, REAL), parse_type("sum {a: real, b: real}"),
                         parse_type("(real -> (real -> real))"), parse_type("mu t. sum {n: real, c: t}")])


@settings(max_examples=80, deadline=None)
@given(rationals, rationals, st.integers(0, 2), st.integers(0, 2), types)
def test_family_is_monotone(q1, q2, d1, d2, ty):
    small = set(rational_label_family(min(d1, d2), q1, types=(ty,)))
    big = set(rational_label_family(max(d1, d2), q1 + q2, types=(ty,)))
    assert small <= big


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 2 ** 32), st.integers(0, 3))
def test_app_step_is_total_and_type_preserving(seed, depth):
    rng = random.Random(seed)
    prog = random_program(rng, depth)
    states = [make_state(prog), make_state(parse("lam x: real. plus(x, 1.0)")),
              make_state(parse("inj<sum {a: real, b: real}> b 0.5")), make_state(parse("fold<mu t. real> 2.0"))]
    acts = list(rational_label_family(1, DEFAULT_RATIONALS,
                                      types=(REAL, Arrow(REAL, REAL), parse_type("sum {a: real, b: real}"))))
    acts.append(UNBOX)
    for s in states:
        for a in acts:
            out = app_step(s, a, fuel=50, check=True)
            assert out is NULL or isinstance(out, (DiracTo, WeightedDirac, EvalMeasure))
            if isinstance(out, WeightedDirac):
                assert 0.0 <= out.weight <= 1.0
