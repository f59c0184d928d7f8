"""
The acceptance battery: fourteen checks tying the implementation to the
model's claims, each with a fixed tolerance and a fixed random stream.

``run(names)`` executes a subset in order and returns one ``CriterionResult``
per check.
"""

from __future__ import annotations

import time
from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq

from .attention import threshold
from .dynamics import Policy, _probs, simulate
from .limit import (
    _g,
    analyze,
    quasi_steady_state,
    quasi_steady_states,
    scan_agrees,
)
from .model import Evocativeness, KnifeEdgeError, ModelParams, Region, random_params
from .montecarlo import (
    estimate_limit_distribution,
    fixed_policy_check,
    initial_at,
    limit_behavior,
    linear_noise,
    nonconvergence_check,
    stable_control,
)
from .statics import PREDICTIONS, kappa_bounds, sign_check, theta_shape

SEED = 20261016

GOLDEN_I_BELOW_M = ModelParams(20, 8, 0.9, 1, 1, 0.65, 0.55)
GOLDEN_M_BELOW_I = ModelParams(1, 2.4, 0.9, 1, 1, 0.9, 0.65)
CROSSOVER_BASE = ModelParams(1, 1, 0.75, 1, 1, 0.7, 0.75)
KAPPA_BASE = ModelParams(1, 1, 0.75, 1, 1, 0.7, 0.75)

THETA_GOLDENS = (
    ("y_s_star", ModelParams(0.3, 1.5, 0.5, 0.6, 0.3, 0.55, 0.95), 0.95),
    ("y_m_star", ModelParams(1, 8, 0.5, 0.6, 0.3, 0.9, 0.95), 0.87),
    ("y_i_star", ModelParams(0.45, 3, 0.5, 0.6, 0.3, 0.53, 0.9), 0.9),
)

# configurations with an unstable threshold, paired with a stable control point
UNSTABLE_CASES = (
    (ModelParams(7.66, 1.46, 0.918, 5.47, 7.21, 0.894, 0.421), "y_hat_m", "y_m_star"),
    (ModelParams(15.06, 13.16, 0.087, 5.74, 1.006, 0.935, 0.363), "y_hat_i", "y_m_star"),
    (ModelParams(23.26, 1.458, 0.737, 7.91, 7.83, 0.885, 0.255), "y_hat_m", "y_n_star"),
)

# three stable points: y*_N, y*_I and y*_S
MULTI_STABLE = ModelParams(15.03, 2.666, 0.620, 2.163, 1.854, 0.658, 0.578)
MULTI_START = (0.5, 10.0)


@dataclass(frozen=True)
class CriterionResult:
    key: str
    number: int
    passed: bool
    detail: str
    tolerance: str
    seconds: float

    def line(self) -> str:
        flag = "PASS" if self.passed else "FAIL"
        return f"[{flag}] {self.number:2d} {self.key:<16} {self.seconds:7.2f}s  tol: {self.tolerance}  {self.detail}"

    def to_dict(self) -> dict:
        return {"key": self.key, "number": self.number, "passed": self.passed, "detail": self.detail,
                "tolerance": self.tolerance, "seconds": round(self.seconds, 3)}


def _rng(number: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence([SEED, number]))


def _draws(number: int, n: int) -> list:
    rng = _rng(number)
    return [random_params(rng) for _ in range(n)]


def anchor_n(threads=1):
    err = max(abs(quasi_steady_state(Region.N, p) - 1 / (1 + p.kappa)) for p in _draws(1, 100))
    return err <= 1e-12, f"max |y*_N - 1/(1+kappa)| = {err:.2e} over 100 draws", "1e-12"


def ode_endpoints(threads=1):
    err = 0.0
    for p in _draws(2, 1000):
        for r in Region:
            err = max(err, abs(_g(r, 0.0, p) - 1.0), abs(_g(r, 1.0, p) + p.kappa))
    return err <= 1e-12, f"max endpoint error {err:.2e} over 1000 draws x 4 regions", "1e-12"


def qss_ordering(threads=1):
    bad = 0
    worst = np.inf
    for p in _draws(3, 10_000):
        q = quasi_steady_states(p)
        gap = min(q.y_s_star, q.y_m_star) - max(q.y_i_star, q.y_n_star)
        worst = min(worst, gap)
        bad += gap <= 0
    return bad == 0, f"{bad} violations in 10000 draws; smallest gap {worst:.3e}", "strict inequality"


def limit_structure(threads=1):
    bad_struct = bad_scan = knife = 0
    for p in _draws(4, 10_000):
        try:
            a = analyze(p)
        except KnifeEdgeError:
            knife += 1
            continue
        q = set(a.qss_in_region)
        sf = set(a.stable_names)
        if not (q <= sf <= q | {"y_hat_i"}) or "y_hat_m" in sf:
            bad_struct += 1
        if not scan_agrees(a):
            bad_scan += 1
    ok = bad_struct == 0 and bad_scan == 0 and knife < 100
    return ok, (f"structure violations {bad_struct}, scan disagreements {bad_scan}, "
                f"knife-edge draws skipped {knife}"), "exact set relations; scan agreement"


def golden(threads=1):
    msgs = []
    ok = True
    a = analyze(GOLDEN_I_BELOW_M)
    th, q = a.thresholds, a.qss
    c1 = th.y_hat_i < th.y_hat_m and q.y_i_star < th.y_hat_i < q.y_n_star and a.stable_names == {"y_hat_i"}
    msgs.append(f"(20,8,...) S_F={sorted(a.stable_names)}")
    a = analyze(GOLDEN_M_BELOW_I)
    th, q = a.thresholds, a.qss
    c2 = th.y_hat_i > th.y_hat_m and q.y_s_star < th.y_hat_i < q.y_m_star and a.stable_names == {"y_hat_i"}
    msgs.append(f"(1,2.4,...) S_F={sorted(a.stable_names)}")
    ok = c1 and c2
    return ok, "; ".join(msgs), "exact set equality"


def _crossing(fn, lo, hi, n=241):
    grid = np.linspace(lo, hi, n)
    vals = np.array([fn(x) for x in grid])
    idx = np.nonzero(np.sign(vals[:-1]) != np.sign(vals[1:]))[0]
    return [brentq(fn, grid[k], grid[k + 1], xtol=1e-12) for k in idx]


def crossover_points() -> dict:
    base = CROSSOVER_BASE

    def qss_diff(a, b):
        return lambda d: quasi_steady_state(a, base.with_value("delta", d)) - quasi_steady_state(
            b, base.with_value("delta", d))

    def thr_diff(d):
        p = base.with_value("delta", d)
        return threshold(Evocativeness.I, p) - threshold(Evocativeness.M, p)

    return {
        "y_m_star - y_s_star": _crossing(qss_diff(Region.M, Region.S), 0.6, 0.9),
        "y_n_star - y_i_star": _crossing(qss_diff(Region.N, Region.I), 0.6, 0.9),
        "y_hat_i - y_hat_m": _crossing(thr_diff, 0.6, 0.9),
    }


def crossovers(threads=1):
    targets = {"y_m_star - y_s_star": 0.745, "y_n_star - y_i_star": 0.751, "y_hat_i - y_hat_m": 0.664}
    found = crossover_points()
    ok = True
    parts = []
    for k, t in targets.items():
        roots = found[k]
        good = len(roots) == 1 and abs(roots[0] - t) <= 0.005
        ok &= good
        parts.append(f"{k}: {['%.4f' % r for r in roots]}")
    return ok, "; ".join(parts), "single crossing within +-0.005"


STATICS_MIN_BASES = 20
STATICS_MAX_DRAWS = 30_000


def statics_cells() -> list:
    # y_hat_m is never a limit point, so its cells fall outside this criterion
    return [(t, x) for t, row in PREDICTIONS.items() if t != "y_hat_m" for x in row]


def statics_signs(threads=1):
    cells = statics_cells()
    passes = {c: 0 for c in cells}
    fails = {c: 0 for c in cells}
    rng = _rng(7)
    draws = 0
    while draws < STATICS_MAX_DRAWS and min(passes[c] + fails[c] for c in cells) < STATICS_MIN_BASES:
        draws += 1
        p = random_params(rng)
        try:
            a = analyze(p)
        except KnifeEdgeError:
            continue
        for c in cells:
            target, param = c
            if passes[c] + fails[c] >= STATICS_MIN_BASES or target not in a.stable_names:
                continue
            r = sign_check(target, param, p, analysis=a)
            if r.verdict == "pass":
                passes[c] += 1
            elif r.verdict == "fail":
                fails[c] += 1
    short = [c for c in cells if passes[c] + fails[c] < STATICS_MIN_BASES]
    failed = [c for c in cells if fails[c]]
    ok = not short and not failed
    detail = f"{len(cells)} cells, {draws} draws; failing cells {failed}; under-sampled {short}"
    return ok, detail, f">= {STATICS_MIN_BASES} comparable bases per cell, all passing; constants |diff|<=1e-9"


def theta_goldens(threads=1):
    ok = True
    parts = []
    for target, base, quoted in THETA_GOLDENS:
        r = theta_shape(target, base)
        good = r.shape == "decreasing_then_increasing" and r.theta_switch is not None \
            and abs(r.theta_switch - quoted) <= 0.03
        ok &= good
        sw = "none" if r.theta_switch is None else f"{r.theta_switch:.4f}"
        parts.append(f"{target}: {r.shape} switch {sw} (quoted {quoted})")
    return ok, "; ".join(parts), "+-0.03"


def kappa_regimes(threads=1):
    kb = kappa_bounds(KAPPA_BASE)
    below = np.geomspace(1e-3, kb.kappa_1, 20)
    above = np.geomspace(kb.kappa_2, 1e3, 20)
    ok_below = all(analyze(KAPPA_BASE.with_value("kappa", k)).stable_names == {"y_s_star"} for k in below)
    ok_above = all(analyze(KAPPA_BASE.with_value("kappa", k)).stable_names == {"y_n_star"} for k in above)
    ok = 0 < kb.kappa_1 < kb.kappa_2 and ok_below and ok_above
    return ok, (f"kappa_1={kb.kappa_1:.6f}, kappa_2={kb.kappa_2:.6f}; grid below S-only {ok_below}, "
                f"grid above N-only {ok_above}"), "bisection to 1e-6; 20-point grids"


DRIFT_Z = 1e6
DRIFT_DRAWS = 100_000


def drift_check(p: ModelParams, region: Region, y: float, rng, z=DRIFT_Z, n=DRIFT_DRAWS):
    """(Monte Carlo mean of |z|*dy, standard error, g, bias bound) for one-step draws at share y."""
    t, f = y * z, (1 - y) * z
    pt, pf = _probs(region, y, p)
    u = rng.random(n)
    d_true = np.where(u < pt, 1 + p.rho, 1.0)
    d_false = np.where(u < pt, p.kappa, np.where(u < pt + pf, p.kappa + p.rho, p.kappa))
    dy = (t + d_true) / (t + f + d_true + d_false) - y
    x = dy * z
    se = x.std(ddof=1) / np.sqrt(n)
    # |z*dy - (dT - y dZ)| <= (dT - y dZ) dZ / z <= (1+kappa+rho)^2 / z
    bias = (1 + p.kappa + p.rho) ** 2 / z
    return float(x.mean()), float(se), float(_g(region, y, p)), bias


def drift(threads=1):
    rng = _rng(10)
    worst = 0.0
    bad = 0
    for _ in range(50):
        p = random_params(rng)
        y = float(rng.uniform(0.01, 0.99))
        region = Region.from_code(int(rng.integers(0, 4)))
        mean, se, g, bias = drift_check(p, region, y, rng)
        ratio = abs(mean - g) / (3 * se + bias)
        worst = max(worst, ratio)
        bad += ratio > 1
    return bad == 0, f"{bad} of 50 triples outside; worst |diff|/(3SE+bias) = {worst:.3f}", \
        "3 standard errors + (1+kappa+rho)^2/|z|"


FIXED_RUNS = 200
FIXED_STEPS = 10**6
FIXED_MAX_SD = 0.0025


def fixed_policy_params(region: Region, k: int = 5, max_sd: float = FIXED_MAX_SD):
    """First k draws whose single-region urn is in the n^(-1/2) regime at 10^6 steps."""
    rng = _rng(11 + 100 * (region.code + 1))
    chosen, rejected = [], 0
    while len(chosen) < k:
        p = random_params(rng)
        if linear_noise(p, region, FIXED_STEPS).sd <= max_sd:
            chosen.append(p)
        else:
            rejected += 1
    return chosen, rejected


def fixed_policy(threads=1):
    parts = []
    ok = True
    for region in Region:
        params, rejected = fixed_policy_params(region)
        fracs = []
        for i, p in enumerate(params):
            r = fixed_policy_check(p, region, FIXED_RUNS, FIXED_STEPS, SEED + i, threads=threads)
            fracs.append(r.fraction)
        ok &= min(fracs) >= 0.95
        parts.append(f"{region.value}: min {min(fracs):.3f} ({rejected} slow draws skipped)")
    return ok, "; ".join(parts), ">= 95% within 0.01 of y*_R; 200 runs x 10^6 steps"


def n_branch_params(k: int = 5):
    rng = _rng(12)
    out = []
    while len(out) < k:
        p = random_params(rng)
        try:
            a = analyze(p)
        except KnifeEdgeError:
            continue
        if "y_n_star" in a.stable_names:
            out.append(a)
    return out


def n_branch(threads=1):
    n_steps = 20_000
    bad = 0
    worst = 0.0
    for i, a in enumerate(n_branch_params()):
        p = a.params
        init = initial_at(0.5 * a.thresholds.lower)
        tr = simulate(init, Policy.optimal(a.thresholds), p, n_steps, SEED + i)
        n = np.arange(n_steps + 1)
        t_ref = init.t_count + n
        f_ref = init.f_count + p.kappa * n
        exact = (np.array_equal(tr.t, t_ref) and np.array_equal(tr.f, f_ref)
                 and np.array_equal(tr.y, t_ref / (t_ref + f_ref)))
        # the rearranged denominator rounds differently, hence a few ulps
        y_alt = t_ref / (init.total + n * (1 + p.kappa))
        err = float(np.max(np.abs(tr.y - y_alt) / y_alt))
        worst = max(worst, err)
        bad += not exact or err > 8 * np.finfo(float).eps or np.any(tr.region_codes != Region.N.code)
    return bad == 0, f"{bad} of 5 trajectories deviate; (T0+n)/(Z0+n(1+kappa)) within {worst:.1e}", \
        "T, F, y bitwise against the closed-form counts; 8 ulp against the rearranged ratio"


NONCONV_RUNS = 500
NONCONV_STEPS = 10**6


def nonconvergence(threads=1):
    ok = True
    parts = []
    for i, (p, unstable, control) in enumerate(UNSTABLE_CASES):
        r = nonconvergence_check(p, unstable, NONCONV_RUNS, NONCONV_STEPS, SEED + i, threads=threads)
        c = stable_control(p, control, NONCONV_RUNS, NONCONV_STEPS, SEED + i, threads=threads)
        ok &= r.fraction <= 0.01 and c.fraction >= 0.5
        parts.append(f"{unstable}@{r.location:.3f}: {r.fraction:.3f}, control {control}: {c.fraction:.3f}")
    return ok, "; ".join(parts), "<= 1% near unstable; control >= 50%"


RANDOM_LIMIT_RUNS = 1000
RANDOM_LIMIT_STEPS = 10**6


def random_limit(threads=1):
    a = analyze(MULTI_STABLE)
    y0, z0 = MULTI_START
    d = estimate_limit_distribution(MULTI_STABLE, initial_at(y0, z0), RANDOM_LIMIT_RUNS, RANDOM_LIMIT_STEPS,
                                    SEED, threads=threads)
    heavy = [n for n, f in d.fractions.items() if f >= 0.05]
    behaviors = {limit_behavior(a, n) for n in heavy}
    ok = len(a.stable_set) >= 2 and len(heavy) >= 2 and len(behaviors) == len(heavy)
    fr = ", ".join(f"{n}={f:.3f}" for n, f in sorted(d.fractions.items()))
    return ok, f"|S_F|={len(a.stable_set)}; {fr}; unassigned {d.unassigned_fraction:.3f}", \
        ">= 5% of 1000 runs at each of two stable points"


CRITERIA = (
    (1, "anchor_n", anchor_n),
    (2, "ode_endpoints", ode_endpoints),
    (3, "lemma3", qss_ordering),
    (4, "theorem1", limit_structure),
    (5, "golden", golden),
    (6, "crossovers", crossovers),
    (7, "statics_signs", statics_signs),
    (8, "theta_shape", theta_goldens),
    (9, "kappa_bounds", kappa_regimes),
    (10, "drift", drift),
    (11, "fixed_policy", fixed_policy),
    (12, "n_branch", n_branch),
    (13, "nonconvergence", nonconvergence),
    (14, "random_limit", random_limit),
)

KEYS = tuple(k for _, k, _ in CRITERIA)


def run_one(key: str, threads: int = 1) -> CriterionResult:
    number, fn = next((n, f) for n, k, f in CRITERIA if k == key)
    start = time.perf_counter()
    try:
        passed, detail, tol = fn(threads=threads)
    except Exception as exc:  # a crash is a failed criterion, not a crashed battery
        passed, detail, tol = False, f"error: {type(exc).__name__}: {exc}", "-"
    return CriterionResult(key, number, bool(passed), detail, tol, time.perf_counter() - start)


def select(filters=None) -> list:
    """Criterion keys matching any filter: all-digit filters by number, others by key substring."""
    if not filters:
        return list(KEYS)
    out = []
    for n, k, _ in CRITERIA:
        if any(f == str(n) if f.isdigit() else f in k for f in filters):
            out.append(k)
    if not out:
        raise KeyError(f"no criterion matches {filters}")
    return out


def run(filters=None, threads: int = 1, echo=None) -> list:
    results = []
    for key in select(filters):
        r = run_one(key, threads)
        if echo is not None:
            echo(r.line())
        results.append(r)
    return results
