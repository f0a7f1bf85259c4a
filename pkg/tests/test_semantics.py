import random

import numpy as np
import pytest
from hypothesis import assume, given, settings, strategies as st

from lmplambda.measures import ks_one_sample, ks_two_sample, uniform_cdf
from lmplambda.semantics import (
    EXHAUSTED, Converged, DrawBoundExceeded, RngStream, estimate, eval_sample, exact_eval_grid,
    feller_audit, harmonic_sequence, modular_eval, modular_grid, modular_reconstruct,
)
from lmplambda.semantics import feller
from lmplambda.semantics.feller import CONVERGENT, DIVERGENT, embed, validate_battery
from lmplambda.semantics.generate import check_modular, grid_distance, random_program
from lmplambda.semantics.measure import ValueMeasure
from lmplambda.semantics.rng import mix_stream
from lmplambda.syntax import CONTINUOUS, FULL, factorize, fill, parse, registry_for
from lmplambda.syntax.sugar import omega


def test_rng_streams_are_reproducible_and_distinct():
    a = [RngStream(7, 3).uniform() for _ in range(1)]
    b = RngStream(7, 3)
    assert a[0] == b.uniform()
    x = RngStream(7, 3).uniforms(100)
    y = RngStream(7, 4).uniforms(100)
    assert not np.array_equal(x, y)
    assert np.all((x > 0) & (x < 1))


def test_rng_rejects_out_of_range_seeds():
    with pytest.raises(ValueError):
        RngStream(-1)
    with pytest.raises(ValueError):
        RngStream(2 ** 64)


def test_mix_stream_is_deterministic():
    assert mix_stream(1, 2, 3) == mix_stream(1, 2, 3)
    assert mix_stream(1, 2, 3) != mix_stream(1, 3, 2)


def test_value_converges_and_fuel_zero_diverges():
    out = eval_sample(parse("3.0"), 1, RngStream(0))
    assert isinstance(out, Converged) and str(out) == "3.0"
    assert eval_sample(parse("3.0"), 0, RngStream(0)) is EXHAUSTED
    assert eval_sample(parse("(lam x: real. x) 3.0"), 1, RngStream(0)) is EXHAUSTED
    assert str(eval_sample(parse("(lam x: real. x) 3.0"), 2, RngStream(0))) == "3.0"


@pytest.mark.parametrize("fuel", [0, 1, 10, 1000])
def test_omega_always_exhausts(fuel):
    assert eval_sample(omega(), fuel, RngStream(fuel)) is EXHAUSTED


def test_estimate_identity_is_exact():
    m = estimate(parse("(lam x: real. x) 3.0"), 1000, 100, 0)
    assert m.exact and m.values == [3.0] and m.mass == 1.0
    rep = m.report(0, 1000, 100)
    assert rep["atoms"] == [{"value": "3.0", "weight": 1.0}]
    assert set(rep) >= {"type", "mass", "atoms", "real_samples", "seed", "samples", "fuel"}


def test_estimate_sample_is_uniform():
    m = estimate(parse("sample"), 20000, 100, 5)
    assert not ks_one_sample(m, uniform_cdf, 0.01).reject
    assert m.mass == 1.0


def test_estimate_does_not_depend_on_jobs():
    t = parse("let x = sample in let y = sample in plus(x, y)")
    a = estimate(t, 9000, 100, 11)
    b = estimate(t, 9000, 100, 11, n_jobs=2)
    assert a.values == b.values


def test_fuel_monotone_mass():
    t = parse("let x = sample in let y = plus(x, 1.0) in times(y, y)")
    masses = [estimate(t, 200, f, 1).mass for f in range(0, 12)]
    assert masses == sorted(masses) and masses[0] == 0.0 and masses[-1] == 1.0


def test_exact_grid_examples():
    g = exact_eval_grid(parse("bernoulli(0.0, 1.0, 0.5)"), 1000, 1000)
    assert g.atom_weight(0.0) == 0.5 and g.atom_weight(1.0) == 0.5
    g = exact_eval_grid(parse("sample"), 100, 10)
    assert np.allclose(g.values, np.arange(10) / 10 + 0.05)
    assert np.allclose(g.weights, 0.1)
    g = exact_eval_grid(parse("plus(1.0, 2.0)"), 100, 10)
    assert g.values == [3.0] and g.mass == 1.0
    with pytest.raises(DrawBoundExceeded):
        exact_eval_grid(parse("let a = sample in let b = sample in let c = sample in c"), 100, 4, max_draws=2)


def test_modular_basic_entries():
    pre, _ = factorize(parse("sample"))
    (e,) = modular_eval(pre, 10).entries
    assert str(e) == "[#1] <- LebesgueDraw : 1.0"
    pre, _ = factorize(parse("lam x: real. x"))
    (e,) = modular_eval(pre, 10).entries
    assert e.kernel.p == 0 and e.weight == 1.0
    assert modular_eval(pre, 0).entries == ()


def test_modular_plus_one_matches_estimate():
    t = parse("let x = sample in plus(x, 1.0)")
    pre, reals = factorize(t)
    a = modular_reconstruct(pre, reals, 10, 20000, 1)
    b = estimate(t, 20000, 10, 2, mode=CONTINUOUS)
    assert not ks_two_sample(a, b, 0.01).reject
    assert a.reals().min() >= 1.0 and a.reals().max() <= 2.0


def test_modular_deterministic_preterm():
    t = parse("plus(1.0, 2.0)")
    pre, reals = factorize(t)
    a = modular_reconstruct(pre, reals, 10, 10, 0)
    assert set(a.reals().tolist()) == {3.0}


def test_modular_bernoulli_full_mode():
    t = parse("bernoulli(0.0, 1.0, 0.5)")
    pre, reals = factorize(t)
    reg = registry_for(FULL)
    a = modular_reconstruct(pre, reals, 100, 20000, 3, registry=reg)
    sigma = 3 * np.sqrt(0.25 / 20000)
    assert abs(a.atom_weight(0.0) - 0.5) <= sigma and abs(a.atom_weight(1.0) - 0.5) <= sigma


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 2 ** 32))
def test_modular_weight_monotone_in_fuel(seed):
    pre, _ = factorize(random_program(random.Random(seed), 4))
    reg = registry_for(CONTINUOUS)
    w = [modular_eval(pre, f, registry=reg).total_weight for f in (0, 2, 5, 10, 40)]
    assert all(x <= y + 1e-12 for x, y in zip(w, w[1:]))
    assert w[-1] <= 1.0 + 1e-12


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 2 ** 32))
def test_modular_grid_matches_exact_grid(seed):
    t = random_program(random.Random(seed), 4, max_draws=2)
    pre, reals = factorize(t)
    reg = registry_for(CONTINUOUS)
    dist = modular_eval(pre, 1000, registry=reg)
    # a function applied twice may draw twice from one syntactic sample
    assume(max([e.kernel.draws() for e in dist.entries], default=0) <= 2)
    g1 = exact_eval_grid(t, 1000, 16, registry=reg, max_draws=2)
    g2 = modular_grid(pre, reals, 1000, 16, registry=reg, dist=dist)
    assert grid_distance(g1, g2) <= 1e-9


def test_grid_distance_values():
    a = ValueMeasure(None, 0, [0.0, 1.0], [0.5, 0.5])
    b = ValueMeasure(None, 0, [0.0, 1.0005], [0.5, 0.5])
    c = ValueMeasure(None, 0, [0.0, 1.0], [0.25, 0.75])
    assert grid_distance(a, a) == 0.0
    assert grid_distance(a, b) == pytest.approx(5e-4)
    assert grid_distance(a, c) == 1.0


def test_check_modular_small():
    rep = check_modular(count=4, depth=3, samples=3000, seed=9)
    assert rep.ok, [c.to_dict() for c in rep.checks]


def test_feller_identity_converges():
    pre, reals = factorize(parse("id(0.0)"))
    rep = feller_audit(pre, reals, harmonic_sequence(reals), samples=200, seed=1, mode=CONTINUOUS)
    assert rep.verdict == CONVERGENT


def test_feller_step_diverges():
    pre, reals = factorize(parse("step(0.0)"))
    rep = feller_audit(pre, reals, harmonic_sequence(reals, sign=-1.0), samples=200, seed=1)
    assert rep.verdict == DIVERGENT
    # the sigmoid centred at 1/2 separates the outputs 0 and 1
    assert min(rep.gaps["sigmoid((x-0.5)/0.05)"]) >= 0.9


def test_feller_unused_hole_is_flat():
    pre, reals = factorize(parse("let a = id(2.0) in sample"))
    rep = feller_audit(pre, reals, harmonic_sequence(reals), samples=500, seed=4, mode=CONTINUOUS)
    assert rep.verdict == CONVERGENT
    assert all(g == 0.0 for gs in rep.gaps.values() for g in gs)


def test_feller_rejects_non_convergent_sequences():
    pre, reals = factorize(parse("id(0.0)"))
    with pytest.raises(ValueError):
        feller_audit(pre, reals, [np.array([1.0]), np.array([2.0])], samples=10)


def test_feller_degenerate_sequence():
    pre, reals = factorize(parse("step(0.0)"))
    rep = feller_audit(pre, reals, [reals.copy()], samples=10)
    assert rep.verdict == CONVERGENT and rep.notes


def test_battery_validation():
    with pytest.raises(ValueError):
        validate_battery([feller.TestFunction("big", lambda x: 2.0 * np.ones_like(x))])
    assert embed(3.5) == 3.5
