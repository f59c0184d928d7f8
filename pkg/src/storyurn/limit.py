"""
Limit ODEs of the single-region urns, their quasi steady states, and the
differential inclusion obtained by pasting them at the thresholds.

Stability of inclusion steady states is decided in closed form from the
ordering of landmarks (``analyze``) and, independently, by scanning the sign
of the inclusion's selection on both sides of each candidate
(``classify_stability_by_scan``).
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import bisect

from .attention import MAX_BISECT_ITER, Thresholds, thresholds as compute_thresholds
from .dynamics import _probs, region_of
from .model import (
    KNIFE_EDGE_TOL,
    TOL,
    KnifeEdgeError,
    ModelParams,
    Region,
    require_valid,
)

STABLE = "stable"
UNSTABLE = "unstable"
NOT_STEADY = "not_steady"

QSS_NAMES = {Region.N: "y_n_star", Region.I: "y_i_star", Region.M: "y_m_star", Region.S: "y_s_star"}
LANDMARK_NAMES = ("y_n_star", "y_i_star", "y_m_star", "y_s_star", "y_hat_i", "y_hat_m")

SCAN_EPS = 1e-4
SCAN_POINTS = 64
SCAN_DEGENERATE = 1e-14


def _g(region: Region, y, p: ModelParams):
    pt, pf = _probs(region, y, p)
    return 1.0 + pt * p.rho - y * (1.0 + p.kappa + p.rho * (pt + pf))


def g(region: Region, y, params: ModelParams):
    """Drift of the share of true stories under a fixed sharing rule."""
    return _g(Region(region), y, require_valid(params))


def _qss(region: Region, p: ModelParams) -> float:
    if region is Region.N:
        return 1.0 / (1.0 + p.kappa)
    return bisect(lambda y: _g(region, y, p), 0.0, 1.0, xtol=1e-16,
                  maxiter=MAX_BISECT_ITER)


def quasi_steady_state(region: Region, params: ModelParams) -> float:
    """Unique zero of ``g(region, .)`` in (0, 1)."""
    return _qss(Region(region), require_valid(params))


@dataclass(frozen=True)
class QuasiSteadyStates:
    y_n_star: float
    y_i_star: float
    y_m_star: float
    y_s_star: float

    def of(self, region: Region) -> float:
        return getattr(self, QSS_NAMES[Region(region)])

    def as_dict(self) -> dict:
        return {name: self.of(r) for r, name in QSS_NAMES.items()}


def quasi_steady_states(params: ModelParams) -> QuasiSteadyStates:
    p = require_valid(params)
    return QuasiSteadyStates(*(_qss(r, p) for r in (Region.N, Region.I, Region.M, Region.S)))


def ldi_value(y: float, thresholds: Thresholds, params: ModelParams) -> tuple:
    """The set F(y) as a closed interval (lo, hi); a singleton off the thresholds."""
    p = require_valid(params)
    inter = thresholds.intermediate_region
    for y_hat, left, right in ((thresholds.lower, Region.N, inter),
                               (thresholds.upper, inter, Region.S)):
        if abs(y - y_hat) <= TOL:
            a, b = _g(left, y_hat, p), _g(right, y_hat, p)
            return (min(a, b), max(a, b))
    v = _g(region_of(y, thresholds), y, p)
    return (v, v)


@dataclass(frozen=True)
class LdiSteadyState:
    name: str  # landmark name, e.g. "y_s_star" or "y_hat_i"
    location: float
    kind: str  # "quasi" | "threshold"
    stability: str  # STABLE | UNSTABLE
    region: Region | None = None  # own region of a quasi steady state

    def to_dict(self) -> dict:
        out = {"name": self.name, "location": self.location, "kind": self.kind,
               "stability": self.stability}
        if self.region is not None:
            out["region"] = self.region.value
        return out


@dataclass(frozen=True)
class ConfigIndex:
    """One of the 40 strict orderings of the five live landmarks.

    ``threshold_positions`` are the 1-based positions of the lower and upper
    threshold among the sorted landmarks. ``intermediate_low`` records the one
    free pairwise order left by the quasi steady state ordering: y*_I < y*_N when the
    intermediate region is I, y*_M < y*_S when it is M.
    """

    threshold_order: str  # "I_below_M" | "M_below_I"
    threshold_positions: tuple
    intermediate_low: bool

    @property
    def index(self) -> int:
        pairs = list(itertools.combinations(range(1, 6), 2))
        base = 0 if self.threshold_order == "I_below_M" else 20
        return base + 2 * pairs.index(tuple(self.threshold_positions)) + (0 if self.intermediate_low else 1)

    def label(self) -> str:
        i, j = self.threshold_positions
        return f"({i},{j})"

    def to_dict(self) -> dict:
        return {"threshold_order": self.threshold_order,
                "threshold_positions": list(self.threshold_positions),
                "intermediate_low": self.intermediate_low, "index": self.index}


@dataclass(frozen=True)
class LimitAnalysis:
    params: ModelParams
    qss: QuasiSteadyStates
    thresholds: Thresholds
    stable_set: tuple
    unstable_set: tuple
    configuration: ConfigIndex
    qss_in_region: tuple = field(default=())  # names of Q, quasi steady states inside their region

    @property
    def stable_names(self) -> frozenset:
        return frozenset(s.name for s in self.stable_set)

    @property
    def unstable_names(self) -> frozenset:
        return frozenset(s.name for s in self.unstable_set)

    @property
    def intermediate_region(self) -> Region:
        return self.thresholds.intermediate_region

    def landmark(self, name: str) -> float:
        if name == "y_hat_i":
            return self.thresholds.y_hat_i
        if name == "y_hat_m":
            return self.thresholds.y_hat_m
        return getattr(self.qss, name)

    def live_landmarks(self) -> dict:
        """The five landmarks that pin down the phase diagram."""
        inter = self.intermediate_region
        names = ["y_hat_i", "y_hat_m", "y_n_star", QSS_NAMES[inter], "y_s_star"]
        return {n: self.landmark(n) for n in names}

    def region_of(self, y: float) -> Region:
        return region_of(y, self.thresholds)

    def to_dict(self) -> dict:
        return {
            "params": self.params.as_dict(),
            "thresholds": {"y_hat_i": self.thresholds.y_hat_i, "y_hat_m": self.thresholds.y_hat_m,
                           "intermediate_region": self.intermediate_region.value},
            "quasi_steady_states": self.qss.as_dict(),
            "qss_in_region": list(self.qss_in_region),
            "stable_set": [s.to_dict() for s in self.stable_set],
            "unstable_set": [s.to_dict() for s in self.unstable_set],
            "configuration": self.configuration.to_dict(),
        }


def _own_region(region: Region, y: float, y_i: float, y_m: float) -> bool:
    lo, hi = min(y_i, y_m), max(y_i, y_m)
    inter = Region.I if y_i < y_m else Region.M
    if region is Region.N:
        return y < lo
    if region is Region.S:
        return y > hi
    return region is inter and lo < y < hi


def classify_landmarks(y_hat_i: float, y_hat_m: float, qss: dict):
    """Closed-form stability from the landmark ordering alone.

    ``qss`` maps QSS names to locations. Returns (Q names, stable list,
    unstable list) where list entries are (name, kind).
    A threshold with left region W and right region Z is a steady state iff
    the two drifts disagree in sign there; it is stable iff y*_Z < y_hat < y*_W.
    """
    q = [QSS_NAMES[r] for r in (Region.N, Region.I, Region.M, Region.S)
         if _own_region(r, qss[QSS_NAMES[r]], y_hat_i, y_hat_m)]
    stable = [(n, "quasi") for n in q]
    unstable = []
    inter = Region.I if y_hat_i < y_hat_m else Region.M
    lo_name, hi_name = ("y_hat_i", "y_hat_m") if inter is Region.I else ("y_hat_m", "y_hat_i")
    y_lo, y_hi = min(y_hat_i, y_hat_m), max(y_hat_i, y_hat_m)
    for name, y_hat, left, right in ((lo_name, y_lo, Region.N, inter),
                                     (hi_name, y_hi, inter, Region.S)):
        w = qss[QSS_NAMES[left]]
        z = qss[QSS_NAMES[right]]
        if z < y_hat < w:
            stable.append((name, "threshold"))
        elif w < y_hat < z:
            unstable.append((name, "threshold"))
    return q, stable, unstable


def configuration_of(y_hat_i: float, y_hat_m: float, qss: dict) -> ConfigIndex:
    inter = Region.I if y_hat_i < y_hat_m else Region.M
    inter_name = QSS_NAMES[inter]
    live = {"y_hat_i": y_hat_i, "y_hat_m": y_hat_m, "y_n_star": qss["y_n_star"],
            inter_name: qss[inter_name], "y_s_star": qss["y_s_star"]}
    order = sorted(live, key=live.get)
    pos = tuple(sorted((order.index("y_hat_i") + 1, order.index("y_hat_m") + 1)))
    if inter is Region.I:
        low = qss["y_i_star"] < qss["y_n_star"]
        return ConfigIndex("I_below_M", pos, bool(low))
    low = qss["y_m_star"] < qss["y_s_star"]
    return ConfigIndex("M_below_I", pos, bool(low))


def _check_knife_edge(live: dict):
    items = sorted(live.items(), key=lambda kv: kv[1])
    for (n1, v1), (n2, v2) in zip(items, items[1:]):
        if v2 - v1 < KNIFE_EDGE_TOL:
            raise KnifeEdgeError(f"landmarks {n1} and {n2} coincide ({v1!r}, {v2!r})", (n1, n2))


def analyze(params: ModelParams) -> LimitAnalysis:
    p = require_valid(params)
    th = compute_thresholds(p)
    qss = quasi_steady_states(p)
    qd = qss.as_dict()
    inter = th.intermediate_region
    live = {"y_hat_i": th.y_hat_i, "y_hat_m": th.y_hat_m, "y_n_star": qd["y_n_star"],
            QSS_NAMES[inter]: qd[QSS_NAMES[inter]], "y_s_star": qd["y_s_star"]}
    _check_knife_edge(live)
    q, stable, unstable = classify_landmarks(th.y_hat_i, th.y_hat_m, qd)

    def make(name, kind, stability):
        loc = th.y_hat_i if name == "y_hat_i" else th.y_hat_m if name == "y_hat_m" else qd[name]
        region = None
        if kind == "quasi":
            region = next(r for r, n in QSS_NAMES.items() if n == name)
        return LdiSteadyState(name, loc, kind, stability, region)

    stable_set = tuple(sorted((make(n, k, STABLE) for n, k in stable), key=lambda s: s.location))
    unstable_set = tuple(sorted((make(n, k, UNSTABLE) for n, k in unstable), key=lambda s: s.location))
    if any(s.name == "y_hat_m" for s in stable_set):
        raise AssertionError("y_hat_m classified stable; quasi steady state ordering violated")
    return LimitAnalysis(p, qss, th, stable_set, unstable_set,
                         configuration_of(th.y_hat_i, th.y_hat_m, qd), tuple(q))


class InconclusiveScan(RuntimeError):
    pass


def _scan_side(y0: float, eps: float, side: int, th: Thresholds, p: ModelParams):
    # open interval (y0 - eps, y0) or (y0, y0 + eps), excluding endpoints
    frac = np.arange(1, SCAN_POINTS + 1) / (SCAN_POINTS + 1)
    ys = y0 + side * eps * frac
    vals = np.array([_g(region_of(y, th), y, p) for y in ys])
    if np.any(np.abs(vals) < SCAN_DEGENERATE):
        raise InconclusiveScan(f"drift vanishes near {y0!r}")
    if np.all(vals > 0):
        return 1
    if np.all(vals < 0):
        return -1
    return 0


def classify_stability_by_scan(analysis: LimitAnalysis) -> dict:
    """Label each candidate steady state by sampling drift signs next to it.

    Candidates are the quasi steady states lying in their own region and both
    thresholds. The one-sided windows have width 1e-4, shrunk to half the gap to
    the nearest other landmark so that no window straddles another landmark.
    """
    p = analysis.params
    th = analysis.thresholds
    live = analysis.live_landmarks()
    candidates = {}
    for r, name in QSS_NAMES.items():
        y = analysis.qss.of(r)
        if analysis.region_of(y) is r and y not in (th.y_hat_i, th.y_hat_m):
            candidates[name] = y
    candidates["y_hat_i"] = th.y_hat_i
    candidates["y_hat_m"] = th.y_hat_m
    everything = sorted(set(live.values()) | set(candidates.values()))
    labels = {}
    for name, y0 in candidates.items():
        gaps = [abs(v - y0) for v in everything if v != y0]
        eps = min([SCAN_EPS, y0 / 2, (1 - y0) / 2] + [gap / 2 for gap in gaps])
        left = _scan_side(y0, eps, -1, th, p)
        right = _scan_side(y0, eps, +1, th, p)
        if left > 0 and right < 0:
            labels[name] = STABLE
        elif left < 0 and right > 0:
            labels[name] = UNSTABLE
        else:
            labels[name] = NOT_STEADY
    return labels


def scan_agrees(analysis: LimitAnalysis, labels: dict | None = None) -> bool:
    labels = classify_stability_by_scan(analysis) if labels is None else labels
    scan_stable = {n for n, s in labels.items() if s == STABLE}
    scan_unstable = {n for n, s in labels.items() if s == UNSTABLE}
    return scan_stable == set(analysis.stable_names) and scan_unstable == set(analysis.unstable_names)


@dataclass(frozen=True)
class AbstractConfiguration:
    """A strict landmark ordering with its phase-diagram classification."""

    configuration: ConfigIndex
    order: tuple  # landmark names, increasing
    stable: tuple
    unstable: tuple
    out_of_region: tuple  # live quasi steady states outside their own region

    def positions(self) -> dict:
        return {n: (i + 1) / (len(self.order) + 1) for i, n in enumerate(self.order)}


def enumerate_configurations() -> list:
    """All 40 orderings permitted by the quasi steady state ordering, classified symbolically."""
    out = []
    for threshold_order in ("I_below_M", "M_below_I"):
        inter_name = "y_i_star" if threshold_order == "I_below_M" else "y_m_star"
        if threshold_order == "I_below_M":
            qss_orders = [("y_i_star", "y_n_star", "y_s_star"), ("y_n_star", "y_i_star", "y_s_star")]
            lo_t, hi_t = "y_hat_i", "y_hat_m"
        else:
            qss_orders = [("y_n_star", "y_m_star", "y_s_star"), ("y_n_star", "y_s_star", "y_m_star")]
            lo_t, hi_t = "y_hat_m", "y_hat_i"
        for qorder in qss_orders:
            for i, j in itertools.combinations(range(5), 2):
                slots = [None] * 5
                slots[i], slots[j] = lo_t, hi_t
                rest = iter(qorder)
                order = tuple(s if s is not None else next(rest) for s in slots)
                pos = {n: (k + 1) / 6 for k, n in enumerate(order)}
                qss = {"y_n_star": pos["y_n_star"], "y_s_star": pos["y_s_star"],
                       "y_i_star": pos.get("y_i_star", 0.5), "y_m_star": pos.get("y_m_star", 0.5)}
                # the inactive intermediate QSS plays no role; park it off the live points
                qss["y_m_star" if inter_name == "y_i_star" else "y_i_star"] = 0.5 / 6
                q, stable, unstable = classify_landmarks(pos["y_hat_i"], pos["y_hat_m"], qss)
                cfg = configuration_of(pos["y_hat_i"], pos["y_hat_m"], qss)
                live_qss = ("y_n_star", inter_name, "y_s_star")
                out.append(AbstractConfiguration(
                    cfg, order, tuple(n for n, _ in stable), tuple(n for n, _ in unstable),
                    tuple(n for n in live_qss if n not in q)))
    out.sort(key=lambda c: c.configuration.index)
    return out
