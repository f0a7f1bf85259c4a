import itertools
import random
from fractions import Fraction as F

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.optimize import linprog

from lmplambda.measures import (
    BOT, NOT_RELATED, CarrierMismatch, EquivRelation, FiniteMeasure, bot_complete,
    check_gamma_eq_theta, coupling_marginal_error, discretize_uniform, gamma_related,
    ks_critical_coefficient, ks_one_sample, ks_two_sample, normal_cdf, random_measure,
    random_partition, random_triple, theta_related, theta_stability_probe, tv_discrete,
    uniform_cdf, within_binomial,
)
from lmplambda.semantics.rng import RngStream


# -- independent oracles


def gamma_by_closed_sets(r, mu, nu):
    """Equal mass on every union of blocks (all closed sets enumerated)."""
    blocks = r.blocks
    for k in range(len(blocks) + 1):
        for chosen in itertools.combinations(blocks, k):
            pts = [x for b in chosen for x in b]
            if mu.mass_of(pts) != nu.mass_of(pts):
                return False
    return True


def theta_by_lp(r, mu, nu):
    """Feasibility of the coupling polytope of the completed measures."""
    mb, nb = bot_complete(mu), bot_complete(nu)
    rows, cols = mb.points, nb.points
    pairs = [(i, j) for i, x in enumerate(rows) for j, y in enumerate(cols)
             if (x is BOT and y is BOT) or (x is not BOT and y is not BOT and r.related(x, y))]
    if not pairs:
        return False
    a = np.zeros((len(rows) + len(cols), len(pairs)))
    for k, (i, j) in enumerate(pairs):
        a[i, k] = 1
        a[len(rows) + j, k] = 1
    b = [float(mb[x]) for x in rows] + [float(nb[y]) for y in cols]
    res = linprog(np.zeros(len(pairs)), A_eq=a, b_eq=b, bounds=(0, None), method="highs")
    return res.status == 0


# -- finite measures


def test_finite_measure_validation():
    with pytest.raises(ValueError):
        FiniteMeasure({"a": -0.1})
    with pytest.raises(ValueError):
        FiniteMeasure({"a": F(3, 4), "b": F(1, 2)})
    m = FiniteMeasure({"a": F(1, 3), "b": F(1, 3)})
    assert m.total == F(2, 3) and m.exact


def test_bot_complete_examples():
    m = bot_complete(FiniteMeasure.dirac("a"))
    assert m[BOT] == 0 and m["a"] == 1
    m = bot_complete(FiniteMeasure.empty())
    assert m[BOT] == 1 and m.total == 1
    m = bot_complete(FiniteMeasure({"a": 0.3}))
    assert m[BOT] == pytest.approx(0.7) and m.total == pytest.approx(1.0)


def test_gamma_examples():
    r = EquivRelation([["a", "b"], ["c"]])
    half = F(1, 2)
    assert gamma_related(r, FiniteMeasure({"a": half, "c": half}), FiniteMeasure({"b": half, "c": half}))
    t = EquivRelation.total(["a", "b"])
    assert gamma_related(t, FiniteMeasure.dirac("a"), FiniteMeasure.dirac("b"))
    i = EquivRelation.identity(["a", "b"])
    assert not gamma_related(i, FiniteMeasure.dirac("a"), FiniteMeasure.dirac("b"))


def test_theta_examples():
    i = EquivRelation.identity(["a", "b"])
    assert theta_related(i, FiniteMeasure.dirac("a"), FiniteMeasure.dirac("b")) is NOT_RELATED
    r = EquivRelation([["a", "b"], ["c"]])
    half = F(1, 2)
    mu, nu = FiniteMeasure({"a": half, "c": half}), FiniteMeasure({"b": half, "c": half})
    c = theta_related(r, mu, nu)
    assert c
    w = {(c.rows[i], c.cols[j]): x for (i, j), x in c.entries.items() if x}
    assert w == {("a", "b"): half, ("c", "c"): half, (BOT, BOT): 0} or w == {("a", "b"): half, ("c", "c"): half}
    assert coupling_marginal_error(c, mu, nu) == 0
    js = c.to_json()
    assert set(js) == {"rows", "cols", "entries"}


def test_empty_and_unequal_totals():
    r = EquivRelation.total(["a", "b"])
    e = FiniteMeasure.empty()
    assert gamma_related(r, e, e) and theta_related(r, e, e)
    mu, nu = FiniteMeasure({"a": F(1, 2)}), FiniteMeasure({"a": F(1, 4)})
    assert not gamma_related(r, mu, nu) and not theta_related(r, mu, nu)


def test_carrier_mismatch():
    r = EquivRelation([["a"]])
    with pytest.raises(CarrierMismatch):
        gamma_related(r, FiniteMeasure.dirac("z"), FiniteMeasure.dirac("a"))


def test_tv_examples():
    a, b = FiniteMeasure.dirac(0), FiniteMeasure.dirac(1)
    assert tv_discrete(a, a) == 0 and tv_discrete(a, b) == 1
    half = F(1, 2)
    assert tv_discrete(FiniteMeasure({0: half, 1: half}), FiniteMeasure({0: F(3, 4), 1: F(1, 4)})) == 0.25


triples = st.builds(lambda seed, size: random_triple(size, random.Random(seed)),
                    st.integers(0, 2 ** 32), st.integers(1, 6))


@settings(max_examples=300, deadline=None)
@given(triples)
def test_gamma_and_theta_match_the_oracles(t):
    r, mu, nu = t
    g = gamma_related(r, mu, nu)
    assert g == gamma_by_closed_sets(r, mu, nu)
    assert bool(theta_related(r, mu, nu)) == theta_by_lp(r, mu, nu) == g


@settings(max_examples=200, deadline=None)
@given(triples)
def test_bot_completion_preserves_relatedness(t):
    r, mu, nu = t
    rb = r.with_bot()
    assert gamma_related(r, mu, nu) == gamma_related(rb, bot_complete(mu), bot_complete(nu))


@settings(max_examples=150, deadline=None)
@given(st.integers(0, 2 ** 32), st.integers(1, 6))
def test_gamma_is_an_equivalence(seed, size):
    rng = random.Random(seed)
    carrier = [f"x{i}" for i in range(size)]
    r = random_partition(carrier, rng)
    a, b, c = (random_measure(carrier, rng, 4) for _ in range(3))
    assert gamma_related(r, a, a)
    assert gamma_related(r, a, b) == gamma_related(r, b, a)
    if gamma_related(r, a, b) and gamma_related(r, b, c):
        assert gamma_related(r, a, c)


@settings(max_examples=100, deadline=None)
@given(triples)
def test_coupling_marginals_are_exact(t):
    r, mu, nu = t
    c = theta_related(r, mu, nu)
    if c:
        assert coupling_marginal_error(c, mu, nu) <= 1e-9
        assert all(w >= 0 for w in c.entries.values())


def test_float_measures_use_tolerance():
    r = EquivRelation([["a", "b"]])
    mu = FiniteMeasure({"a": 0.1, "b": 0.2})
    nu = FiniteMeasure({"a": 0.3})
    assert gamma_related(r, mu, nu) and theta_related(r, mu, nu)


def test_verifier_small_run():
    rep = check_gamma_eq_theta(max_size=5, trials=300, seed=3)
    assert rep.ok and rep.agreements == 300 and rep.related > 0
    with pytest.raises(ValueError):
        check_gamma_eq_theta(max_size=9, trials=1)


# -- statistics


def test_ks_critical_value():
    assert ks_critical_coefficient(0.01) == pytest.approx(1.628, abs=1e-3)


def test_ks_examples():
    x = RngStream(1).uniforms(10000)
    r = ks_two_sample(x, x)
    assert r.statistic == 0 and not r.reject
    y = RngStream(2).uniforms(10000)
    assert not ks_two_sample(x, y).reject
    z = RngStream(3).uniforms(10000) + 0.5
    r = ks_two_sample(x, z)
    assert r.reject and r.statistic >= 0.45
    assert not ks_one_sample(x, uniform_cdf).reject
    assert ks_one_sample(x, normal_cdf).reject


def test_weighted_ks_matches_replicated_sample():
    from lmplambda.semantics.measure import ValueMeasure

    a = ValueMeasure(None, 0, [0.0, 1.0, 2.0], [0.25, 0.5, 0.25])
    b = np.array([0.0, 1.0, 1.0, 2.0])
    assert ks_two_sample(a, b).statistic == pytest.approx(0.0)


def test_within_binomial():
    assert within_binomial(0.5, 0.5, 100)
    assert within_binomial(0.504, 0.5, 100000)
    assert not within_binomial(0.51, 0.5, 100000)


# -- limits


def test_stability_constant_and_dirac_sequences():
    diag = lambda x, y: x == y
    mus = [FiniteMeasure.dirac(1.0 / n) for n in range(1, 20)]
    rep = theta_stability_probe(diag, mus, mus, FiniteMeasure.dirac(0.0), FiniteMeasure.dirac(0.0))
    assert all(rep.feasible_steps) and rep.feasible_limit and rep.finding is None


def test_stability_band_relation():
    band = lambda x, y: abs(x - y) <= 0.1 + 1e-12
    mus = [discretize_uniform(0.0, 1.0, k) for k in (4, 8, 16, 32)]
    nus = [discretize_uniform(0.05, 1.05, k) for k in (4, 8, 16, 32)]
    rep = theta_stability_probe(band, mus, nus, discretize_uniform(0.0, 1.0, 64),
                                discretize_uniform(0.05, 1.05, 64))
    assert all(rep.feasible_steps) and rep.feasible_limit
