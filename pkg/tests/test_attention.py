import dataclasses

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.optimize import brentq

from storyurn.attention import attention_level, sharing_utility, threshold, thresholds, value
from storyurn.model import TOL, Evocativeness, InvalidParamsError, KnifeEdgeError, Region, random_params

from conftest import BASE, CASE_I, CASE_M, valid_params

E = list(Evocativeness)


def primitive_utility(a, y, e, p):
    """Expected payoff of sharing on signal T' built from the story/signal primitives."""
    q = p.delta if e is Evocativeness.I else 1 - p.delta  # P(e | false); P(e | true) = 1/2
    interest = 1.0 if e is Evocativeness.I else 0.0
    u_true = p.lam + (1 - p.lam) * interest
    u_false = -p.lam * p.mu + (1 - p.lam) * interest
    w_true, w_false = 0.5 * y, (1 - y) * q
    post_true = w_true / (w_true + w_false)
    return post_true * u_true + (1 - post_true) * p.theta * (1 - a) * u_false - p.beta * a * a


GRID = np.linspace(0, 1, 10_001)


@pytest.mark.parametrize("e", E)
@pytest.mark.parametrize("y", [0.05, 0.5, 0.9])
def test_attention_matches_grid_search(e, y):
    best = GRID[np.argmax([primitive_utility(a, y, e, BASE) for a in GRID])]
    assert attention_level(y, e, BASE) == pytest.approx(best, abs=1e-4)


@pytest.mark.parametrize("e", E)
def test_utility_matches_primitives(e):
    rng = np.random.default_rng(3)
    for _ in range(200):
        p = random_params(rng)
        a, y = rng.uniform(0, 1), rng.uniform(0, 1)
        assert sharing_utility(a, y, e, p) == pytest.approx(primitive_utility(a, y, e, p), abs=1e-12)


@pytest.mark.parametrize("a", [0.0, 0.3, 1.0])
def test_utility_at_all_true(a):
    assert sharing_utility(a, 1.0, Evocativeness.M, BASE) == pytest.approx(BASE.lam - BASE.beta * a * a)
    assert sharing_utility(a, 1.0, Evocativeness.I, BASE) == pytest.approx(1 - BASE.beta * a * a)


@pytest.mark.parametrize("e", E)
def test_attention_vanishes_at_all_true(e):
    assert attention_level(1.0, e, BASE) == 0.0


def test_value_endpoints():
    p = BASE
    assert value(1.0, Evocativeness.I, p) == pytest.approx(1.0)
    assert value(1.0, Evocativeness.M, p) == pytest.approx(p.lam)
    x = p.lam * p.mu * p.theta
    assert value(0.0, Evocativeness.M, p) == pytest.approx(x * (x - 4 * p.beta) / (4 * p.beta))
    assert value(0.0, Evocativeness.M, p) < 0


@pytest.mark.parametrize("e", E)
def test_attention_flat_in_delta_at_zero_share(e):
    a = [attention_level(0.0, e, BASE.with_value("delta", d)) for d in (0.55, 0.7, 0.95)]
    assert a == pytest.approx([a[0]] * 3, abs=1e-15)


@pytest.mark.parametrize("e", E)
def test_value_is_utility_at_optimum(e, param_draws):
    ys = np.linspace(0, 1, 1000)
    for p in param_draws[:20]:
        a = attention_level(ys, e, p)
        np.testing.assert_allclose(value(ys, e, p), sharing_utility(a, ys, e, p), atol=1e-12, rtol=0)


@settings(max_examples=200, deadline=None)
@given(valid_params(), st.floats(0.0, 1.0))
def test_attention_is_interior(p, y):
    for e in E:
        a = attention_level(y, e, p)
        assert 0 <= a <= 1
        if y < 1:
            assert a > 0


def test_attention_outside_unit_interval_is_asserted():
    with pytest.raises(AssertionError):
        attention_level(1.5, Evocativeness.M, BASE)


def _d(fn, p, name, h=1e-6):
    return (fn(p.with_value(name, p.get(name) + h)) - fn(p.with_value(name, p.get(name) - h))) / (2 * h)


@pytest.mark.parametrize("e, name, sign", [
    (Evocativeness.M, "theta", 1), (Evocativeness.I, "theta", 1),
    (Evocativeness.M, "beta", -1), (Evocativeness.I, "beta", -1),
    (Evocativeness.M, "lambda", 1), (Evocativeness.I, "lambda", 1),
    (Evocativeness.M, "mu", 1), (Evocativeness.I, "mu", 1),
    (Evocativeness.M, "delta", -1), (Evocativeness.I, "delta", 1),
])
def test_attention_parameter_derivatives(e, name, sign):
    # at y=0 the delta factors cancel, so the grid starts just above it
    ys = np.linspace(0.01, 0.99, 100)
    rng = np.random.default_rng(11)
    for _ in range(30):
        p = random_params(rng)
        h = 1e-6
        lo, hi = p.with_value(name, p.get(name) - h), p.with_value(name, p.get(name) + h)
        if not (lo.is_valid and hi.is_valid):
            continue
        d = (attention_level(ys, e, hi) - attention_level(ys, e, lo)) / (2 * h)
        assert np.all(sign * d > 0), (p, name)


@pytest.mark.parametrize("e", E)
def test_attention_decreasing_in_share(e, param_draws):
    ys = np.linspace(0, 1, 200)
    for p in param_draws:
        assert np.all(np.diff(attention_level(ys, e, p)) < 0)
        assert attention_level(0.2, e, p) > attention_level(0.8, e, p)


@pytest.mark.parametrize("e", E)
def test_value_strictly_increasing(e, param_draws):
    ys = np.linspace(0, 1, 2000)
    for p in param_draws:
        assert np.all(np.diff(value(ys, e, p)) > 0)


@pytest.mark.parametrize("e", E)
def test_threshold_is_bracket_insensitive(e):
    rng = np.random.default_rng(5)
    p = random_params(rng)
    root = threshold(e, p)
    assert abs(value(root, e, p)) <= TOL
    for _ in range(100):
        lo, hi = rng.uniform(0, root), rng.uniform(root, 1)
        assert threshold(e, p, bracket=(lo, hi)) == pytest.approx(root, abs=1e-10)


def test_threshold_examples():
    th = thresholds(CASE_I)
    assert th.y_hat_i < th.y_hat_m and th.intermediate_region is Region.I
    th = thresholds(CASE_M)
    assert th.y_hat_i > th.y_hat_m and th.intermediate_region is Region.M
    th = thresholds(BASE.with_value("delta", 0.9))
    assert th.y_hat_i > th.y_hat_m
    assert thresholds(BASE.with_value("delta", 0.6)).y_hat_i < thresholds(BASE.with_value("delta", 0.6)).y_hat_m


def test_threshold_residuals(param_draws):
    for p in param_draws:
        th = thresholds(p)
        assert abs(value(th.y_hat_i, Evocativeness.I, p)) <= TOL
        assert abs(value(th.y_hat_m, Evocativeness.M, p)) <= TOL
        assert th.lower < th.upper


def test_coinciding_thresholds_raise():
    def gap(d):
        p = BASE.with_value("delta", d)
        return threshold(Evocativeness.I, p) - threshold(Evocativeness.M, p)

    d_star = brentq(gap, 0.6, 0.7, xtol=1e-15)
    with pytest.raises(KnifeEdgeError) as info:
        thresholds(BASE.with_value("delta", d_star))
    assert set(info.value.landmarks) == {"y_hat_i", "y_hat_m"}


@pytest.mark.parametrize("fn", [
    lambda p: attention_level(0.5, Evocativeness.M, p),
    lambda p: sharing_utility(0.1, 0.5, Evocativeness.I, p),
    lambda p: value(0.5, Evocativeness.I, p),
    lambda p: threshold(Evocativeness.M, p),
    thresholds,
])
def test_invalid_params_rejected(fn):
    with pytest.raises(InvalidParamsError):
        fn(dataclasses.replace(BASE, theta=1.2))
