"""
The platform as a piecewise generalized Polya urn.

Each period one true and kappa false stories arrive; with probability
p_true (p_false) the current user shares a true (false) story and rho extra
copies of it are added. Which sharing rule the user follows is set by a
``Policy``: the optimal rule for the current share, a fixed rule (the
counterfactual single-region urn), or the hybrid process that drifts
deterministically through the region not adjacent to y_hat_i.
"""

from __future__ import annotations

import contextlib
import csv
import gzip
import io
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import _kernel
from .attention import Thresholds, _attention
from .model import (
    Evocativeness,
    ModelParams,
    PlatformState,
    Region,
    require_valid,
)

CHUNK = 1 << 18


@dataclass(frozen=True)
class SharingProbs:
    p_true: float
    p_false: float


@dataclass(frozen=True)
class Policy:
    kind: str  # "optimal" | "fixed" | "hybrid"
    region: Region | None = None
    thresholds: Thresholds | None = None

    @classmethod
    def optimal(cls, thresholds: Thresholds) -> "Policy":
        return cls("optimal", thresholds=thresholds)

    @classmethod
    def fixed(cls, region: Region) -> "Policy":
        return cls("fixed", region=Region(region))

    @classmethod
    def hybrid(cls, thresholds: Thresholds) -> "Policy":
        """Only defined when y_hat_i is a stable steady state of the inclusion."""
        from .limit import analyze

        analysis = analyze(thresholds.params)
        if "y_hat_i" not in analysis.stable_names:
            raise ValueError("hybrid policy requires y_hat_i to be a stable steady state")
        return cls("hybrid", thresholds=thresholds)

    @property
    def other_region(self) -> Region:
        """Region not adjacent to y_hat_i (hybrid only)."""
        if self.thresholds.intermediate_region is Region.I:
            return Region.S
        return Region.N

    def to_dict(self) -> dict:
        out = {"kind": self.kind}
        if self.region is not None:
            out["region"] = self.region.value
        if self.thresholds is not None:
            out["y_hat_i"] = self.thresholds.y_hat_i
            out["y_hat_m"] = self.thresholds.y_hat_m
        return out


def region_of(y: float, thresholds: Thresholds) -> Region:
    """Region containing ``y``; a share exactly on a threshold belongs to the right."""
    if y < thresholds.lower:
        return Region.N
    if y < thresholds.upper:
        return thresholds.intermediate_region
    return Region.S


def _probs(region: Region, y, p: ModelParams):
    if region is Region.N:
        return 0.0 * y, 0.0 * y
    if region is Region.S:
        a_i = _attention(y, Evocativeness.I, p)
        a_m = _attention(y, Evocativeness.M, p)
        return y, (1 - y) * p.theta * (1 - p.delta * a_i - (1 - p.delta) * a_m)
    if region is Region.I:
        return y / 2, (1 - y) * p.delta * p.theta * (1 - _attention(y, Evocativeness.I, p))
    return y / 2, (1 - y) * (1 - p.delta) * p.theta * (1 - _attention(y, Evocativeness.M, p))


def sharing_probs(region: Region, y: float, params: ModelParams) -> SharingProbs:
    p = require_valid(params)
    pt, pf = _probs(Region(region), y, p)
    return SharingProbs(pt, pf)


def increments(params: ModelParams) -> dict:
    """The three increment vectors (dT, dF) of a regular period."""
    return {
        "true": (1.0 + params.rho, params.kappa),
        "false": (1.0, params.kappa + params.rho),
        "none": (1.0, params.kappa),
    }


def _region_for(policy: Policy, y: float) -> Region:
    if policy.kind == "fixed":
        return policy.region
    return region_of(y, policy.thresholds)


def step(state: PlatformState, policy: Policy, params: ModelParams, rng: np.random.Generator):
    """One period of the urn. Consumes exactly one uniform from ``rng``."""
    p = require_valid(params)
    if not state.total > 0:
        raise ValueError("cannot step an empty platform")
    y = state.share
    u = rng.random()
    region = _region_for(policy, y)
    if policy.kind == "hybrid" and region is policy.other_region:
        if policy.other_region is Region.N:
            return PlatformState(state.t_count + 1.0, state.f_count)
        return PlatformState(state.t_count, state.f_count + 1.0)
    pt, pf = _probs(region, y, p)
    inc = increments(p)
    if u < pt:
        d = inc["true"]
    elif u < pt + pf:
        d = inc["false"]
    else:
        d = inc["none"]
    return PlatformState(state.t_count + d[0], state.f_count + d[1])


def stream(seed: int, run_index: int = 0) -> np.random.Generator:
    """Counter-based generator for one trajectory of one experiment."""
    return np.random.Generator(np.random.Philox(np.random.SeedSequence([int(seed), int(run_index)])))


@dataclass(frozen=True)
class Trajectory:
    seed: int
    run_index: int
    params: ModelParams
    policy: Policy
    t: np.ndarray = field(repr=False)  # T_0..T_n
    f: np.ndarray = field(repr=False)
    region_codes: np.ndarray = field(repr=False)  # region used at step k -> k+1

    @property
    def y(self) -> np.ndarray:
        return self.t / (self.t + self.f)

    @property
    def states(self) -> list:
        return [PlatformState(float(a), float(b)) for a, b in zip(self.t, self.f)]

    @property
    def regions_visited(self) -> list:
        return [Region.from_code(int(c)) for c in self.region_codes]

    def __len__(self):
        return len(self.t)

    def to_csv(self, path, compress: bool = False, comment: str | None = None):
        """Columns n, T, F, y, region; ``region`` is the rule applied at step n (blank on the last row)."""
        y = self.y
        with _text_out(path, compress) as fh:
            if comment:
                fh.write(f"# {comment}\n")
            w = csv.writer(fh)
            w.writerow(["n", "T", "F", "y", "region"])
            for n in range(len(self.t)):
                region = Region.from_code(int(self.region_codes[n])).value if n < len(self.region_codes) else ""
                w.writerow([n, repr(float(self.t[n])), repr(float(self.f[n])), repr(float(y[n])), region])


@contextlib.contextmanager
def _text_out(path, compress: bool):
    if not compress:
        with open(path, "w", newline="") as fh:
            yield fh
        return
    # mtime pinned so that reruns are byte-identical
    with open(path, "wb") as raw, gzip.GzipFile(filename="", mode="wb", fileobj=raw, mtime=0) as gz:
        with io.TextIOWrapper(gz, newline="") as fh:
            yield fh


def _policy_args(policy: Policy):
    if policy.kind == "fixed":
        return _kernel.POLICY_FIXED, policy.region.code, 0.0, 1.0, Region.I.code, -1, 0
    th = policy.thresholds
    inter = th.intermediate_region.code
    if policy.kind == "optimal":
        return _kernel.POLICY_OPTIMAL, 0, th.lower, th.upper, inter, -1, 0
    other = policy.other_region
    direction = 1 if other is Region.N else -1
    return _kernel.POLICY_HYBRID, 0, th.lower, th.upper, inter, other.code, direction


class _Runner:
    """Drives the compiled kernel for one trajectory."""

    def __init__(self, initial: PlatformState, policy: Policy, params: ModelParams):
        if not initial.total > 0:
            raise ValueError("initial platform must hold at least one story")
        if policy.kind == "fixed" and policy.region is None:
            raise ValueError("fixed policy needs a region")
        if policy.kind != "fixed" and policy.thresholds is None:
            raise ValueError(f"{policy.kind} policy needs thresholds")
        self.t0 = float(initial.t_count)
        self.f0 = float(initial.f_count)
        self.prm = require_valid(params).as_array()
        self.pargs = _policy_args(policy)
        self.counts = np.zeros(5, dtype=np.int64)
        self.t, self.f = self.t0, self.f0

    def run(self, rng, n_steps, rec=None, window_start=None, acc=None):
        empty_f = np.empty(0)
        empty_r = np.empty(0, dtype=np.int8)
        if acc is None:
            acc = np.zeros(2)
        if window_start is None:
            window_start = np.iinfo(np.int64).max
        done = 0
        while done < n_steps:
            k = min(CHUNK, n_steps - done)
            u = rng.random(k)
            rt, rf, rr = rec if rec is not None else (empty_f, empty_f, empty_r)
            self.t, self.f = _kernel.advance(
                self.t0, self.f0, self.counts, self.prm, *self.pargs, u, rt, rf, rr,
                done if rec is not None else 0, window_start, int(self.counts[0]), acc,
            )
            done += k
        return acc

    def shock(self, d_true: float, d_false: float):
        # fold an exogenous injection into the base stock
        self.t0 += d_true
        self.f0 += d_false
        self.t += d_true
        self.f += d_false


def simulate(initial: PlatformState, policy: Policy, params: ModelParams, n_steps: int,
             seed: int, run_index: int = 0) -> Trajectory:
    if n_steps < 0:
        raise ValueError("n_steps must be nonnegative")
    runner = _Runner(initial, policy, params)
    t = np.empty(n_steps + 1)
    f = np.empty(n_steps + 1)
    r = np.empty(n_steps, dtype=np.int8)
    t[0], f[0] = runner.t0, runner.f0
    runner.run(stream(seed, run_index), n_steps, rec=(t[1:], f[1:], r))
    return Trajectory(int(seed), int(run_index), params, policy, t, f, r)


@dataclass(frozen=True)
class RunSummary:
    terminal_y: float  # share after the last step
    window_mean: float  # mean share over the last 1% of steps
    t: float
    f: float


def window_length(n_steps: int) -> int:
    return max(1, n_steps // 100)


def run_terminal(initial: PlatformState, policy: Policy, params: ModelParams, n_steps: int,
                 seed: int, run_index: int, shock=None) -> RunSummary:
    """Simulate without recording the path.

    ``shock=(step, dT, dF)`` adds an exogenous mass of stories after ``step`` periods.
    """
    runner = _Runner(initial, policy, params)
    rng = stream(seed, run_index)
    acc = np.zeros(2)
    ws = n_steps - window_length(n_steps) + 1
    if shock is None:
        runner.run(rng, n_steps, window_start=ws, acc=acc)
    else:
        at, d_true, d_false = shock
        runner.run(rng, at, window_start=ws, acc=acc)
        runner.shock(d_true, d_false)
        runner.run(rng, n_steps - at, window_start=ws, acc=acc)
    y_last = runner.t / (runner.t + runner.f)
    mean = acc[0] / acc[1] if acc[1] > 0 else y_last
    return RunSummary(float(y_last), float(mean), float(runner.t), float(runner.f))


def run_batch(initial: PlatformState, policy: Policy, params: ModelParams, n_steps: int,
              seed: int, n_runs: int, threads: int = 1, shock=None) -> list:
    """Independent runs 0..n_runs-1; output order never depends on ``threads``."""
    def one(i):
        return run_terminal(initial, policy, params, n_steps, seed, i, shock=shock)

    if threads <= 1 or n_runs <= 1:
        return [one(i) for i in range(n_runs)]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(one, range(n_runs)))
