import gzip

import numpy as np
import pytest

from storyurn.attention import attention_level, thresholds
from storyurn.dynamics import (
    Policy,
    increments,
    region_of,
    run_batch,
    run_terminal,
    sharing_probs,
    simulate,
    step,
    stream,
)
from storyurn.limit import _g, analyze, quasi_steady_state
from storyurn.model import Evocativeness, ModelParams, PlatformState, Region, random_params

from conftest import BASE, CASE_I, CASE_M


def signal_model_shares(region, y, p, n, rng):
    """Monte Carlo of the primitives: veracity, evocativeness, attention, signal, sharing rule."""
    true = rng.random(n) < y
    very = np.where(true, rng.random(n) < 0.5, rng.random(n) < p.delta)
    a = np.where(very, attention_level(y, Evocativeness.I, p), attention_level(y, Evocativeness.M, p))
    # true stories always look true; a false one looks true with probability theta*(1-a)
    looks_true = true | (rng.random(n) < p.theta * (1 - a))
    wants = {Region.S: np.ones(n, bool), Region.I: very, Region.M: ~very, Region.N: np.zeros(n, bool)}[region]
    shared = looks_true & wants
    return np.mean(shared & true), np.mean(shared & ~true)


@pytest.mark.parametrize("region, y", [(Region.S, 0.0), (Region.S, 0.6), (Region.I, 0.4), (Region.M, 0.3)])
def test_sharing_probs_match_signal_model(region, y):
    n = 1_000_000
    pt_mc, pf_mc = signal_model_shares(region, y, BASE, n, np.random.default_rng(99))
    probs = sharing_probs(region, y, BASE)
    for mc, exact in ((pt_mc, probs.p_true), (pf_mc, probs.p_false)):
        se = np.sqrt(max(exact * (1 - exact), 1e-12) / n)
        assert abs(mc - exact) <= 4 * se


def test_sharing_probs_special_cases(param_draws):
    p = BASE
    assert sharing_probs(Region.N, 0.3, p).p_true == 0 and sharing_probs(Region.N, 0.3, p).p_false == 0
    for r in Region:
        assert sharing_probs(r, 1.0, p).p_false == 0
    a_i = attention_level(0.0, Evocativeness.I, p)
    a_m = attention_level(0.0, Evocativeness.M, p)
    s = sharing_probs(Region.S, 0.0, p)
    assert s.p_true == 0
    assert s.p_false == pytest.approx(p.theta * (1 - p.delta * a_i - (1 - p.delta) * a_m))
    for q in param_draws:
        for r in Region:
            for y in (0.0, 0.3, 0.9):
                pr = sharing_probs(r, y, q)
                assert 0 <= pr.p_true and 0 <= pr.p_false and pr.p_true + pr.p_false <= 1


def test_region_of_examples():
    th = thresholds(CASE_I)
    assert region_of(0.01, th) is Region.N
    assert region_of(0.99, th) is Region.S
    assert region_of(0.5 * (th.y_hat_i + th.y_hat_m), th) is Region.I
    assert region_of(0.5 * (th.y_hat_i + th.y_hat_m), thresholds(CASE_M)) is Region.M


def test_threshold_belongs_to_right_region():
    th = thresholds(CASE_I)
    assert region_of(th.lower, th) is Region.I
    assert region_of(th.upper, th) is Region.S
    assert region_of(np.nextafter(th.lower, 0), th) is Region.N


def test_increments():
    assert increments(BASE) == {"true": (2.0, 1.0), "false": (1.0, 2.0), "none": (1.0, 1.0)}


def test_step_increments_are_exact():
    # integer masses keep every sum exact in floating point
    p = ModelParams(3, 2, 0.75, 1, 1, 0.7, 0.75)
    allowed = set(increments(p).values())
    pol = Policy.optimal(thresholds(p))
    rng = stream(1)
    s = PlatformState(5.0, 5.0)
    for _ in range(2000):
        nxt = step(s, pol, p, rng)
        assert (nxt.t_count - s.t_count, nxt.f_count - s.f_count) in allowed
        s = nxt


def test_step_in_region_n_is_deterministic():
    p = BASE.with_value("kappa", 3.0)
    s = PlatformState(1.0, 9.0)
    for seed in range(5):
        assert step(s, Policy.fixed(Region.N), p, stream(seed)) == PlatformState(2.0, 12.0)


def test_step_is_deterministic():
    s = PlatformState(10.0, 10.0)
    pol = Policy.optimal(thresholds(BASE))
    assert step(s, pol, BASE, stream(4, 2)) == step(s, pol, BASE, stream(4, 2))


def _python_path(initial, policy, p, n, seed):
    rng = stream(seed)
    s = initial
    t, f, regions = [s.t_count], [s.f_count], []
    for _ in range(n):
        y = s.share
        if policy.kind == "fixed":
            regions.append(policy.region.code)
        else:
            regions.append(region_of(y, policy.thresholds).code)
        s = step(s, policy, p, rng)
        t.append(s.t_count)
        f.append(s.f_count)
    return np.array(t), np.array(f), np.array(regions)


@pytest.mark.parametrize("policy_name", ["optimal", "N", "I", "M", "S", "hybrid"])
def test_compiled_path_matches_step(policy_name):
    p = CASE_I
    th = thresholds(p)
    if policy_name == "optimal":
        pol = Policy.optimal(th)
    elif policy_name == "hybrid":
        pol = Policy.hybrid(th)
    else:
        pol = Policy.fixed(Region(policy_name))
    init = PlatformState(3.0, 7.0)
    t, f, r = _python_path(init, pol, p, 3000, seed=17)
    tr = simulate(init, pol, p, 3000, seed=17)
    np.testing.assert_allclose(tr.t, t, rtol=1e-12)
    np.testing.assert_allclose(tr.f, f, rtol=1e-12)
    np.testing.assert_array_equal(tr.region_codes, r)


def test_chunked_uniforms_match_single_draws():
    a = stream(5, 1)
    b = stream(5, 1)
    np.testing.assert_array_equal(a.random(1000), [b.random() for _ in range(1000)])


def test_simulate_is_reproducible():
    pol = Policy.optimal(thresholds(CASE_I))
    init = PlatformState(50.0, 50.0)
    a = simulate(init, pol, CASE_I, 5000, seed=3, run_index=2)
    b = simulate(init, pol, CASE_I, 5000, seed=3, run_index=2)
    c = simulate(init, pol, CASE_I, 5000, seed=3, run_index=3)
    np.testing.assert_array_equal(a.t, b.t)
    np.testing.assert_array_equal(a.f, b.f)
    assert not np.array_equal(a.t, c.t)


def test_zero_steps():
    tr = simulate(PlatformState(2.0, 3.0), Policy.fixed(Region.S), BASE, 0, seed=1)
    assert len(tr) == 1 and tr.states == [PlatformState(2.0, 3.0)]
    assert len(tr.region_codes) == 0


def test_fixed_n_closed_form():
    p = BASE.with_value("kappa", 2.5)
    tr = simulate(PlatformState(1.0, 9.0), Policy.fixed(Region.N), p, 10_000, seed=8)
    n = np.arange(10_001)
    np.testing.assert_array_equal(tr.t, 1.0 + n)
    np.testing.assert_array_equal(tr.f, 9.0 + 2.5 * n)
    np.testing.assert_allclose(tr.y, (1 + n) / (10 + 3.5 * n), rtol=1e-15)


def test_optimal_from_n_converges_to_y_n_star():
    rng = np.random.default_rng(4)
    while True:
        p = random_params(rng)
        a = analyze(p)
        if "y_n_star" in a.stable_names and 0.1 < a.thresholds.lower:
            break
    init = PlatformState(1.0, 9.0)
    tr = simulate(init, Policy.optimal(a.thresholds), p, 200_000, seed=1)
    assert set(tr.regions_visited) == {Region.N}
    assert tr.y[-1] == pytest.approx(1 / (1 + p.kappa), abs=1e-3)


def test_true_branch_frequency_at_pinned_share():
    # a huge platform barely moves, so y is effectively pinned
    p = BASE
    y = 0.6
    init = PlatformState.from_share(y, 1e13)
    tr = simulate(init, Policy.fixed(Region.S), p, 100_000, seed=21)
    dt = np.diff(tr.t)
    freq = np.mean(dt > 1 + p.rho / 2)
    pt = sharing_probs(Region.S, y, p).p_true
    assert abs(freq - pt) <= 3 * np.sqrt(pt * (1 - pt) / 100_000)


def test_expected_drift_matches_limit_ode(param_draws):
    z = 1e6
    for p in param_draws[:50]:
        for r in Region:
            y = 0.37
            pr = sharing_probs(r, y, p)
            outcomes = [(pr.p_true, 1 + p.rho, p.kappa), (pr.p_false, 1.0, p.kappa + p.rho),
                        (1 - pr.p_true - pr.p_false, 1.0, p.kappa)]
            mean = sum(w * ((y * z + dt) / (z + dt + df) - y) for w, dt, df in outcomes) * z
            assert abs(mean - _g(r, y, p)) < 1e-3


def test_hybrid_requires_stable_threshold():
    with pytest.raises(ValueError):
        Policy.hybrid(thresholds(BASE))
    pol = Policy.hybrid(thresholds(CASE_I))
    assert pol.other_region is Region.S
    assert Policy.hybrid(thresholds(CASE_M)).other_region is Region.N


def test_hybrid_moves_deterministically_in_other_region():
    p = CASE_I
    pol = Policy.hybrid(thresholds(p))  # region S becomes a (0,1) drift
    s = PlatformState(90.0, 10.0)
    assert step(s, pol, p, stream(0)) == PlatformState(90.0, 11.0)
    q = CASE_M
    pol = Policy.hybrid(thresholds(q))  # region N becomes a (1,0) drift
    assert step(PlatformState(1.0, 99.0), pol, q, stream(0)) == PlatformState(2.0, 99.0)


def test_batch_is_independent_of_threads():
    pol = Policy.optimal(thresholds(CASE_M))
    init = PlatformState(20.0, 80.0)
    a = run_batch(init, pol, CASE_M, 20_000, seed=9, n_runs=6, threads=1)
    b = run_batch(init, pol, CASE_M, 20_000, seed=9, n_runs=6, threads=3)
    assert a == b
    assert a[2] == run_terminal(init, pol, CASE_M, 20_000, 9, 2)


def test_window_mean_covers_last_percent():
    p = BASE.with_value("kappa", 2.5)
    init = PlatformState(1.0, 9.0)
    r = run_terminal(init, Policy.fixed(Region.N), p, 1000, seed=0, run_index=0)
    n = np.arange(991, 1001)
    assert r.window_mean == pytest.approx(np.mean((1 + n) / (10 + 3.5 * n)), rel=1e-14)
    assert r.t == 1001.0


def test_shock_adds_mass():
    p = BASE.with_value("kappa", 2.5)
    init = PlatformState(1.0, 9.0)
    r = run_terminal(init, Policy.fixed(Region.N), p, 100, 0, 0, shock=(50, 0.0, 40.0))
    assert (r.t, r.f) == (101.0, 9.0 + 250.0 + 40.0)


def test_fixed_policy_needs_region():
    with pytest.raises(ValueError):
        simulate(PlatformState(1, 1), Policy("fixed"), BASE, 10, 0)
    with pytest.raises(ValueError):
        simulate(PlatformState(0, 0), Policy.fixed(Region.S), BASE, 10, 0)


@pytest.mark.parametrize("compress", [False, True])
def test_trajectory_csv(tmp_path, compress):
    tr = simulate(PlatformState(3.0, 7.0), Policy.optimal(thresholds(CASE_I)), CASE_I, 50, seed=2)
    path = tmp_path / ("t.csv.gz" if compress else "t.csv")
    tr.to_csv(path, compress=compress, comment="schema_version: 1")
    first = path.read_bytes()
    tr.to_csv(path, compress=compress, comment="schema_version: 1")
    assert path.read_bytes() == first
    text = gzip.decompress(first).decode() if compress else first.decode()
    lines = text.splitlines()
    assert lines[0] == "# schema_version: 1"
    assert lines[1] == "n,T,F,y,region"
    assert len(lines) == 2 + 51
    assert lines[-1].endswith(",")
