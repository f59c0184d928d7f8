"""
Batch simulation experiments on the empirical distribution of limits.

A run's terminal share is the mean of y over its last 1% of steps. Runs are
assigned to the nearest stable steady state within ``eps_assign``; they are
never assigned to unstable points.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .dynamics import Policy, run_batch
from .limit import LdiSteadyState, LimitAnalysis, analyze
from .model import ModelParams, PlatformState, Region, require_valid

EPS_ASSIGN = 0.02
Z0 = 100.0
NEAR_RADIUS = 0.01

BEHAVIOR = {
    Region.N: "shares nothing",
    Region.I: "shares very interesting T' stories only",
    Region.M: "shares mildly interesting T' stories only",
    Region.S: "shares every T' story",
}


def initial_at(y: float, total: float = Z0) -> PlatformState:
    return PlatformState.from_share(y, total)


def assign(values, stable: dict, eps: float = EPS_ASSIGN) -> list:
    """Name of the nearest stable point within ``eps`` for each value, else None."""
    names = sorted(stable, key=stable.get)
    locs = np.array([stable[n] for n in names])
    out = []
    for v in np.asarray(values, dtype=float):
        if not len(names):
            out.append(None)
            continue
        d = np.abs(locs - v)
        k = int(np.argmin(d))
        out.append(names[k] if d[k] <= eps else None)
    return out


@dataclass(frozen=True)
class LimitDistribution:
    params: ModelParams
    initial: PlatformState
    n_runs: int
    n_steps: int
    seed: int
    eps_assign: float
    stable: dict  # name -> location, the stable set S_F
    terminal_y: np.ndarray = field(repr=False)
    labels: tuple = field(repr=False)
    assignment: dict = field(default_factory=dict)  # name -> count
    unassigned_count: int = 0

    @property
    def fractions(self) -> dict:
        return {k: v / self.n_runs for k, v in self.assignment.items()} if self.n_runs else {}

    @property
    def unassigned_fraction(self) -> float:
        return self.unassigned_count / self.n_runs if self.n_runs else 0.0

    def to_dict(self) -> dict:
        return {
            "params": self.params.as_dict(),
            "initial": {"T": self.initial.t_count, "F": self.initial.f_count},
            "n_runs": self.n_runs, "n_steps": self.n_steps, "seed": self.seed,
            "eps_assign": self.eps_assign, "stable_set": dict(sorted(self.stable.items())),
            "assignment": dict(sorted(self.assignment.items())),
            "unassigned_count": self.unassigned_count,
            "fractions": dict(sorted(self.fractions.items())),
            "unassigned_fraction": self.unassigned_fraction,
        }


def _optimal(analysis: LimitAnalysis) -> Policy:
    return Policy.optimal(analysis.thresholds)


def estimate_limit_distribution(params: ModelParams, initial: PlatformState, n_runs: int, n_steps: int,
                                seed: int, eps_assign: float = EPS_ASSIGN, threads: int = 1,
                                shock=None) -> LimitDistribution:
    p = require_valid(params)
    if n_runs < 1:
        raise ValueError("n_runs must be at least 1")
    analysis = analyze(p)
    stable = {s.name: s.location for s in analysis.stable_set}
    runs = run_batch(initial, _optimal(analysis), p, n_steps, seed, n_runs, threads=threads, shock=shock)
    terminal = np.array([r.window_mean for r in runs])
    labels = assign(terminal, stable, eps_assign)
    counts = {name: 0 for name in stable}
    for lab in labels:
        if lab is not None:
            counts[lab] += 1
    return LimitDistribution(p, initial, n_runs, n_steps, int(seed), eps_assign, stable, terminal,
                             tuple(labels), counts, sum(lab is None for lab in labels))


@dataclass(frozen=True)
class ProximityReport:
    params: ModelParams
    target: str
    location: float
    stability: str
    n_runs: int
    n_steps: int
    radius: float
    within: int
    terminal_y: np.ndarray = field(repr=False)

    @property
    def fraction(self) -> float | None:
        return self.within / self.n_runs if self.n_runs else None

    def to_dict(self) -> dict:
        return {"params": self.params.as_dict(), "target": self.target, "location": self.location,
                "stability": self.stability, "n_runs": self.n_runs, "n_steps": self.n_steps,
                "radius": self.radius, "within": self.within, "fraction": self.fraction}


def _proximity(analysis, point: LdiSteadyState, n_runs, n_steps, seed, radius, z0, threads):
    p = analysis.params
    if n_runs == 0:
        return ProximityReport(p, point.name, point.location, point.stability, 0, n_steps, radius, 0,
                               np.empty(0))
    runs = run_batch(initial_at(point.location, z0), _optimal(analysis), p, n_steps, seed, n_runs,
                     threads=threads)
    term = np.array([r.window_mean for r in runs])
    within = int(np.sum(np.abs(term - point.location) <= radius))
    return ProximityReport(p, point.name, point.location, point.stability, n_runs, n_steps, radius,
                           within, term)


def _find(points, name):
    for s in points:
        if s.name == name:
            return s
    return None


def nonconvergence_check(params: ModelParams, unstable, n_runs: int, n_steps: int = 10**6, seed: int = 0,
                         radius: float = NEAR_RADIUS, z0: float = Z0, threads: int = 1) -> ProximityReport:
    """Fraction of runs started on an unstable steady state that end within ``radius`` of it."""
    analysis = analyze(require_valid(params))
    name = unstable.name if isinstance(unstable, LdiSteadyState) else unstable
    point = _find(analysis.unstable_set, name)
    if point is None:
        raise ValueError(f"{name!r} is not an unstable steady state of these parameters")
    return _proximity(analysis, point, n_runs, n_steps, seed, radius, z0, threads)


def stable_control(params: ModelParams, stable, n_runs: int, n_steps: int = 10**6, seed: int = 0,
                   radius: float = NEAR_RADIUS, z0: float = Z0, threads: int = 1) -> ProximityReport:
    """Same protocol as ``nonconvergence_check`` started on a stable steady state."""
    analysis = analyze(require_valid(params))
    name = stable.name if isinstance(stable, LdiSteadyState) else stable
    point = _find(analysis.stable_set, name)
    if point is None:
        raise ValueError(f"{name!r} is not a stable steady state of these parameters")
    return _proximity(analysis, point, n_runs, n_steps, seed, radius, z0, threads)


def fixed_policy_check(params: ModelParams, region: Region, n_runs: int, n_steps: int, seed: int,
                       initial: PlatformState | None = None, radius: float = NEAR_RADIUS,
                       threads: int = 1) -> ProximityReport:
    """Fixed(R) runs measured against the quasi steady state y*_R."""
    from .limit import QSS_NAMES, quasi_steady_state

    p = require_valid(params)
    region = Region(region)
    target = quasi_steady_state(region, p)
    init = initial if initial is not None else initial_at(0.5)
    runs = run_batch(init, Policy.fixed(region), p, n_steps, seed, n_runs, threads=threads)
    term = np.array([r.window_mean for r in runs])
    within = int(np.sum(np.abs(term - target) <= radius))
    return ProximityReport(p, QSS_NAMES[region], target, "fixed", n_runs, n_steps, radius, within, term)


def limit_behavior(analysis: LimitAnalysis, name: str) -> str:
    """Long-run sharing behaviour of users when the share settles at landmark ``name``."""
    point = _find(analysis.stable_set, name)
    if point is None:
        raise ValueError(f"{name!r} is not a stable steady state")
    if point.region is not None:
        return BEHAVIOR[point.region]
    inter = analysis.intermediate_region
    left, right = (Region.N, inter) if point.location == analysis.thresholds.lower else (inter, Region.S)
    return f"alternates at the threshold: {BEHAVIOR[left]} / {BEHAVIOR[right]}"


@dataclass(frozen=True)
class PathDependenceReport:
    distribution: LimitDistribution
    behaviors: dict  # reached stable point -> behaviour description

    @property
    def degenerate(self) -> bool:
        return len(self.behaviors) < 2

    def to_dict(self) -> dict:
        return {"distribution": self.distribution.to_dict(),
                "behaviors": dict(sorted(self.behaviors.items())), "degenerate": self.degenerate}


def path_dependence_report(params: ModelParams, initial: PlatformState, n_runs: int, n_steps: int, seed: int,
                           eps_assign: float = EPS_ASSIGN, threads: int = 1,
                           require_multiple: bool = True) -> PathDependenceReport:
    analysis = analyze(require_valid(params))
    if require_multiple and len(analysis.stable_set) < 2:
        raise ValueError("path dependence needs at least two stable steady states")
    dist = estimate_limit_distribution(params, initial, n_runs, n_steps, seed, eps_assign, threads)
    behaviors = {name: limit_behavior(analysis, name) for name, c in dist.assignment.items() if c > 0}
    return PathDependenceReport(dist, behaviors)


@dataclass(frozen=True)
class ShockExperiment:
    baseline: LimitDistribution
    shocked: LimitDistribution
    shock: tuple  # (step, dT, dF)

    def shift(self) -> float:
        """Total variation distance between the two assignment distributions."""
        keys = set(self.baseline.assignment) | {None}
        def frac(d, k):
            return d.unassigned_fraction if k is None else d.fractions.get(k, 0.0)
        return 0.5 * sum(abs(frac(self.baseline, k) - frac(self.shocked, k)) for k in keys)


def shock_experiment(params: ModelParams, initial: PlatformState, n_runs: int, n_steps: int, seed: int,
                     at_step: int, false_mass: float, true_mass: float = 0.0,
                     eps_assign: float = EPS_ASSIGN, threads: int = 1) -> ShockExperiment:
    """Same seeds with and without an exogenous injection of stories after ``at_step`` periods."""
    if not 0 <= at_step <= n_steps:
        raise ValueError("shock step outside the run")
    shock = (int(at_step), float(true_mass), float(false_mass))
    base = estimate_limit_distribution(params, initial, n_runs, n_steps, seed, eps_assign, threads)
    hit = estimate_limit_distribution(params, initial, n_runs, n_steps, seed, eps_assign, threads, shock=shock)
    return ShockExperiment(base, hit, shock)


def convergence_ladder(params: ModelParams, initial: PlatformState, n_runs: int, seed: int,
                       ladder=(10**4, 10**5, 10**6), eps_assign: float = EPS_ASSIGN, threads: int = 1) -> list:
    """Limit distributions for increasing run lengths on the same seeds."""
    return [estimate_limit_distribution(params, initial, n_runs, n, seed, eps_assign, threads) for n in ladder]


@dataclass(frozen=True)
class LinearNoise:
    """Linearisation of the single-region urn around its quasi steady state.

    With step sizes 1/(m n), the share behaves like a stochastic approximation
    with rate ``rate = -g'(y*)/m``. For rate > 1/2 the fluctuations shrink like
    n^(-1/2) with the stated standard deviation; for rate <= 1/2 they shrink
    only like n^(-rate) and ``sd`` is infinite.
    """

    region: Region
    location: float
    growth: float  # m, expected |z| increment per step at y*
    rate: float
    sd: float  # asymptotic standard deviation of y_n at n_steps


def linear_noise(params: ModelParams, region: Region, n_steps: int = 10**6) -> LinearNoise:
    from .dynamics import _probs
    from .limit import _g, quasi_steady_state

    p = require_valid(params)
    region = Region(region)
    y = quasi_steady_state(region, p)
    pt, pf = _probs(region, y, p)
    m = 1 + p.kappa + p.rho * (pt + pf)
    h = 1e-7
    slope = (_g(region, min(y + h, 1.0), p) - _g(region, max(y - h, 0.0), p)) / (2 * h)
    rate = -slope / m
    jumps = np.array([(1 + p.rho) - y * (1 + p.kappa + p.rho), 1 - y * (1 + p.kappa + p.rho), 1 - y * (1 + p.kappa)])
    w = np.array([pt, pf, 1 - pt - pf])
    var = float(w @ jumps**2)
    sd = float(np.sqrt(var / (m * m * (2 * rate - 1) * n_steps))) if rate > 0.5 else float("inf")
    return LinearNoise(region, y, m, rate, sd)
