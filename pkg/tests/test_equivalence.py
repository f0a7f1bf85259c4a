import itertools
import random
from fractions import Fraction as F

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

# module aliases: several library functions are named test_* and must not
# be collected by pytest
from lmplambda.equivalence import applicative as app
from lmplambda.equivalence import finite as fin
from lmplambda.equivalence.contexts import (
    Context, compose, context_apply_estimate, default_contexts, distinguish_by_contexts,
)
from lmplambda.equivalence.corpus import corpus_lmp, soundness_context_figures, CorpusConfig
from lmplambda.equivalence.report import (
    DISTINGUISHED, EQUAL_EXACT, NOT_SEPARATED, EquivalenceReport, combine,
)
from lmplambda.equivalence.syntax import (
    OMEGA, TOP, Act, And, Conj, Diamond, parse_formula, parse_test,
)
from lmplambda.lmp import FiniteLMP, make_state, parse_action
from lmplambda.measures import ks_one_sample, uniform_cdf
from lmplambda.syntax import REAL, Arrow, TypeCheckError, parse

HAND = corpus_lmp("hand5.json")


# -- syntax of tests and formulas


@pytest.mark.parametrize("text", ["w", "a.w", "(a.w & b.a.w)", "eval.leq:1/2.w",
                                  "pass:{lam x: real. x}.eval.w"])
def test_test_round_trip(text):
    t = parse_test(text)
    assert str(parse_test(str(t))) == str(t)


def test_formula_round_trip():
    f = parse_formula("(<a>_1/2 T & <b>_0 <a>_1/3 T)")
    assert str(parse_formula(str(f))) == str(f)
    assert isinstance(f, And) and f.depth == 2


def test_test_labels_parse_as_actions():
    t = parse_test("eval.pass:{lam x: real. x}.eval.leq:1/2.w", parse_action)
    assert t.size == 5


# -- finite LMPs


def test_hand_example():
    want = fin.Partition([["s", "t"], ["u", "v", "w"]])
    assert fin.state_bisim_finite(HAND) == want
    assert fin.logical_equiv_finite(HAND, 2) == want
    assert fin.test_partition_finite(HAND) == want


def test_identical_rows_share_a_block():
    l = FiniteLMP(["p", "q", "r"], ["a"], {"a": [[0, 0, 1], [0, 0, 1], [0, 0, 0]]})
    assert fin.state_bisim_finite(l).same("p", "q")


def test_total_mass_split():
    l = FiniteLMP(["s", "t", "z"], ["a"], {"a": [[0, 0, 1], [0, 0, "1/2"], [0, 0, 0]]})
    p = fin.refine_once(l, fin.Partition([l.states]))
    assert not p.same("s", "t")


def test_logic_examples():
    dead = FiniteLMP(["d"], ["a"], {"a": [[0]]})
    assert fin.logic_sat_finite(dead, "d", TOP)
    assert not fin.logic_sat_finite(dead, "d", Diamond("a", F(0), TOP))
    assert len(fin.logical_equiv_finite(HAND, 0)) == 1


def test_test_value_examples():
    s = "s"
    assert fin.test_success_finite(HAND, s, OMEGA) == 1
    assert fin.test_success_finite(HAND, s, Act("a", OMEGA)) == sum(HAND.row("a", s))
    l = FiniteLMP(["x", "y", "z"], ["a", "b"],
                  {"a": [[0, "1/2", "1/4"], [0, 0, 0], [0, 0, 0]], "b": [["1/3", 0, 0], [0, 0, 0], [0, 0, 0]]})
    left, right = Act("a", OMEGA), Act("b", Act("a", OMEGA))
    assert fin.test_success_finite(l, "x", Conj(left, right)) == F(3, 4) * F(1, 3) * F(3, 4)


def test_witnesses_on_counter_example():
    l = corpus_lmp("counter_example.json")
    p = fin.state_bisim_finite(l)
    assert not p.same("M", "N")
    logic = fin.logical_equiv_analysis(l, len(l.states))
    phi = logic.witness(l, "M", "N")
    assert fin.logic_sat_finite(l, "M", phi) != fin.logic_sat_finite(l, "N", phi)
    tests = fin.test_partition_analysis(l)
    t = tests.witness(l, "M", "N")
    assert fin.test_success_finite(l, "M", t) != fin.test_success_finite(l, "N", t)


def all_partitions(items):
    if not items:
        yield []
        return
    first, rest = items[0], items[1:]
    for p in all_partitions(rest):
        for i in range(len(p)):
            yield p[:i] + [[first] + p[i]] + p[i + 1:]
        yield [[first]] + p


lmps = st.builds(lambda seed, n, k: fin.random_finite_lmp(random.Random(seed), n, k),
                 st.integers(0, 2 ** 32), st.integers(1, 8), st.integers(1, 3))


@settings(max_examples=150, deadline=None)
@given(lmps)
def test_three_routes_coincide(l):
    p = fin.state_bisim_finite(l)
    assert fin.is_bisimulation(l, p)
    assert fin.refine_once(l, p) == p
    assert fin.logical_equiv_finite(l, len(l.states)) == p
    assert fin.test_partition_finite(l) == p


@settings(max_examples=60, deadline=None)
@given(st.builds(lambda seed, n: fin.random_finite_lmp(random.Random(seed), n, 2),
                 st.integers(0, 2 ** 32), st.integers(1, 5)))
def test_refinement_gives_the_largest_bisimulation(l):
    p = fin.state_bisim_finite(l)
    for blocks in all_partitions(list(l.states)):
        q = fin.Partition(blocks)
        if fin.is_bisimulation(l, q):
            assert q.refines(p)


@settings(max_examples=80, deadline=None)
@given(lmps)
def test_logic_and_tests_separate_the_same_pairs(l):
    logic = fin.logical_equiv_analysis(l, len(l.states))
    tests = fin.test_partition_analysis(l)
    for s, t in itertools.combinations(l.states, 2):
        phi, w = logic.witness(l, s, t), tests.witness(l, s, t)
        assert (phi is None) == (w is None)
        if w is not None:
            assert fin.test_success_finite(l, s, w) != fin.test_success_finite(l, t, w)


# -- Monte Carlo tests on programs


def test_omega_is_exact():
    e = app.test_success_mc(make_state(parse("sample")), OMEGA)
    assert e.mean == 1.0 and e.se == 0.0 and e.exact


def test_sample_below_half():
    t = parse_test("eval.leq:1/2.w", parse_action)
    e = app.test_success_mc(make_state(parse("sample")), t, samples=20000, seed=3)
    assert e.lo <= 0.5 <= e.hi


def test_conjunction_branches_are_independent():
    t = parse_test("(eval.leq:1/2.w & eval.leq:1/2.w)", parse_action)
    e = app.test_success_mc(make_state(parse("sample")), t, samples=20000, seed=5)
    assert e.lo <= 0.25 <= e.hi


def test_pair_members_agree_on_a_test():
    m = make_state(parse("let x = sample in lam y: real. bernoulli(if eq(x, y) then 1.0 else 0.0, x, 0.5)"))
    n = make_state(parse("let x = sample in lam y: real. bernoulli(0.0, x, 0.5)"))
    t = parse_test("eval.pass:{1.0}.eval.leq:1/2.w", parse_action)
    a = app.test_success_mc(m, t, samples=5000, seed=1)
    b = app.test_success_mc(n, t, samples=5000, seed=1)
    assert not app.separated(a, b)


def test_enumeration_is_canonical():
    s = make_state(parse("lam x: real. x"))
    ts = app.enumerate_tests(s, limit=40)
    assert ts[0] is OMEGA
    keys = [(t.size, str(t)) for t in ts]
    assert keys == sorted(keys) and len(set(keys)) == len(keys)
    assert app.enumerate_tests(s, limit=40) == ts


def test_identical_programs_are_not_separated():
    s = make_state(parse("let x = sample in plus(x, x)"))
    r = app.distinguish_by_tests(s, s, budget=30, samples=2000)
    assert r.verdict == NOT_SEPARATED and r.details["max_standardized_gap"] == 0.0


@pytest.mark.parametrize("other", ["plus(sample, 0.5)", "times(sample, 0.5)", "0.3"])
def test_different_laws_at_real_are_distinguished(other):
    a, b = make_state(parse("sample")), make_state(parse(other))
    r = app.distinguish_by_tests(a, b, budget=20, samples=4000)
    assert r.verdict == DISTINGUISHED
    w = r.witness
    assert w["kind"] == "test" and "leq" in w["test"]
    # replaying the witness gives the same estimates
    t = parse_test(w["test"], parse_action)
    again = app.test_success_mc(a, t, w["replay"]["samples"], w["replay"]["fuel"], w["replay"]["seed"],
                                test_index=w["replay"]["test_index"])
    assert again.to_json() == w["a"]


@settings(max_examples=10, deadline=None)
@given(st.lists(st.fractions(0, 1, max_denominator=8), min_size=1, max_size=3))
def test_witness_persists_under_a_larger_family(extra):
    a, b = make_state(parse("sample")), make_state(parse("times(sample, 0.5)"))
    small = app.distinguish_by_tests(a, b, rationals=[F(1, 2)], budget=10, samples=3000)
    assert small.verdict == DISTINGUISHED
    t = parse_test(small.witness["test"], parse_action)
    big = app.TestEnumerator(1, [F(1, 2)] + extra)
    assert t in list(big.tests("term", REAL, t.size))


# -- contexts and reports


def test_hole_context_on_sample():
    m = context_apply_estimate(Context("[.]", "[.]"), parse("sample"), 20000, 100, 2)
    assert not ks_one_sample(m, uniform_cdf).reject


def test_contexts_must_be_observable():
    with pytest.raises(TypeCheckError):
        compose(Context("lam u: real. [.]", "lam u: real. [.]"), parse("sample"))
    with pytest.raises(ValueError):
        Context("x", "1.0").term()


def test_default_battery_shapes():
    assert default_contexts(Arrow(REAL, REAL))[0].name == "(lam z. z (z 1)) [.]"
    assert len(default_contexts(REAL)) == 3
    assert default_contexts(Arrow(REAL, Arrow(REAL, REAL))) == []


def test_soundness_context_figures_small():
    f = soundness_context_figures(CorpusConfig(samples=20000))
    assert abs(f["M"]["atom_1"] - 0.25) < 0.02 and f["N"]["atom_1"] <= 0.005
    assert abs(f["M"]["atom_0"] - 0.25) < 0.02 and abs(f["N"]["atom_0"] - 0.5) < 0.02


def test_context_search_same_program():
    m = parse("let x = sample in lam y: real. plus(x, y)")
    r = distinguish_by_contexts(m, m, samples=2000)
    assert r.verdict == NOT_SEPARATED


def test_report_rules():
    with pytest.raises(ValueError):
        EquivalenceReport(DISTINGUISHED)
    with pytest.raises(ValueError):
        EquivalenceReport("MAYBE")
    a = EquivalenceReport(NOT_SEPARATED, budget={"tests": 1})
    b = EquivalenceReport(DISTINGUISHED, {"kind": "context", "context": "[.]"})
    c = combine({"tests": a, "contexts": b}, [0])
    assert c.verdict == DISTINGUISHED and c.witness["method"] == "contexts"
    assert combine({"tests": a}, [0]).verdict == NOT_SEPARATED
    assert set(EquivalenceReport(EQUAL_EXACT).to_json()) >= {"verdict", "witness", "budget", "seeds"}
