"""
Comparative statics of the candidate limit points.

Signs are observed by central finite differences of the landmark roots and
compared with the predicted direction. Where the predicted direction depends
on the base point (y*_I in rho, the quasi steady states in theta, y*_S in
delta) the prediction is evaluated from the sign condition on the partial
derivative of the drift at the base point.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .attention import _attention
from .model import (
    PARAM_NAMES,
    Evocativeness,
    InvalidParamsError,
    KnifeEdgeError,
    ModelParams,
    Region,
    require_valid,
)
from .limit import LimitAnalysis, analyze

CONSTANT_TOL = 1e-9
KAPPA_TOL = 1e-6

QSS_TARGETS = ("y_s_star", "y_i_star", "y_m_star")

# "+", "-", "0": fixed sign; "rule": sign depends on the base point
PREDICTIONS = {
    "y_s_star": {"rho": "+", "kappa": "-", "theta": "rule", "mu": "+", "beta": "-", "delta": "rule", "lambda": "+"},
    "y_i_star": {"rho": "rule", "kappa": "-", "theta": "rule", "mu": "+", "beta": "-", "delta": "-", "lambda": "+"},
    "y_m_star": {"rho": "+", "kappa": "-", "theta": "rule", "mu": "+", "beta": "-", "delta": "+", "lambda": "+"},
    "y_hat_i": {"rho": "0", "kappa": "0", "theta": "+", "mu": "+", "beta": "+", "delta": "+", "lambda": "+"},
    "y_hat_m": {"rho": "0", "kappa": "0", "theta": "+", "mu": "+", "beta": "+", "delta": "-", "lambda": "-"},
    "y_n_star": {"rho": "0", "kappa": "-", "theta": "0", "mu": "0", "beta": "0", "delta": "0", "lambda": "0"},
}


def _sign(x: float) -> str:
    return "+" if x > 0 else "-" if x < 0 else "0"


def rule_sign(target: str, parameter: str, analysis: LimitAnalysis) -> str:
    """Predicted direction for base-dependent cells, from the drift's partial derivative."""
    p = analysis.params
    y = analysis.landmark(target)
    th, de, be, lam, mu = p.theta, p.delta, p.beta, p.lam, p.mu
    if (target, parameter) == ("y_i_star", "rho"):
        return _sign(0.5 - de * th * (1 - _attention(y, Evocativeness.I, p)))
    if parameter == "theta":
        if target == "y_s_star":
            k = ((1 - de) ** 2 * lam * mu / (y + 2 * (1 - y) * (1 - de))
                 + de ** 2 * (lam * mu - (1 - lam)) / (y + 2 * de * (1 - y)))
            return _sign(2 * (1 - y) * th / be * k - 1)
        if target == "y_i_star":
            return _sign(2 * de * th * (1 - y) * (lam * mu - (1 - lam)) / (be * (y + 2 * de * (1 - y))) - 1)
        if target == "y_m_star":
            return _sign(2 * lam * mu * (1 - y) * (1 - de) * th / (be * (y + 2 * (1 - y) * (1 - de))) - 1)
    if (target, parameter) == ("y_s_star", "delta"):
        s = ((2 * de - 1) * lam * mu * y ** 2
             - (y + 2 * (1 - y) * (1 - de)) ** 2 * de * (1 - lam) * (y + de * (1 - y)))
        return _sign(s)
    raise KeyError((target, parameter))


def predicted_sign(target: str, parameter: str, analysis: LimitAnalysis) -> tuple:
    """(sign, basis) with basis "table" or "rule"."""
    pred = PREDICTIONS[target][parameter]
    if pred == "rule":
        return rule_sign(target, parameter, analysis), "rule"
    return pred, "table"


def default_step(x: float) -> float:
    return 1e-5 * max(1.0, abs(x))


@dataclass(frozen=True)
class SignReport:
    target: str
    parameter: str
    base: ModelParams
    h: float
    predicted: str
    basis: str
    limit_point: bool  # target in the stable set at the base point
    difference: float | None  # f(x+h) - f(x-h)
    observed: str | None
    verdict: str  # "pass" | "fail" | "not_comparable"
    reason: str = ""

    @property
    def derivative(self) -> float | None:
        return None if self.difference is None else self.difference / (2 * self.h)

    def to_dict(self) -> dict:
        return {"target": self.target, "parameter": self.parameter, **self.base.as_dict(),
                "h": self.h, "predicted": self.predicted, "basis": self.basis,
                "limit_point": self.limit_point, "difference": self.difference,
                "observed": self.observed, "verdict": self.verdict, "reason": self.reason}


def sign_check(target: str, parameter: str, base: ModelParams, h: float | None = None,
               analysis: LimitAnalysis | None = None) -> SignReport:
    if target not in PREDICTIONS or parameter not in PARAM_NAMES:
        raise KeyError((target, parameter))
    base = require_valid(base)
    a0 = analysis if analysis is not None else analyze(base)
    x0 = base.get(parameter)
    h = default_step(x0) if h is None else h
    pred, basis = predicted_sign(target, parameter, a0)
    in_sf = target in a0.stable_names

    def nc(reason):
        return SignReport(target, parameter, base, h, pred, basis, in_sf, None, None, "not_comparable", reason)

    lo, hi = base.with_value(parameter, x0 - h), base.with_value(parameter, x0 + h)
    if not (lo.is_valid and hi.is_valid):
        return nc("stencil leaves the admissible parameter set")
    try:
        a_lo, a_hi = analyze(lo), analyze(hi)
    except KnifeEdgeError as exc:
        return nc(f"knife edge inside stencil: {exc}")
    if len({target in a.stable_names for a in (a_lo, a0, a_hi)}) != 1:
        return nc("landmark crosses a region boundary inside the stencil")
    diff = a_hi.landmark(target) - a_lo.landmark(target)
    if pred == "0":
        observed = "0" if abs(diff) <= CONSTANT_TOL else _sign(diff)
    else:
        observed = _sign(diff)
    verdict = "pass" if observed == pred else "fail"
    return SignReport(target, parameter, base, h, pred, basis, in_sf, diff, observed, verdict)


@dataclass(frozen=True)
class SweepPoint:
    value: float
    analysis: LimitAnalysis | None
    status: str  # "ok" | "knife_edge"
    reason: str = ""


@dataclass(frozen=True)
class Transition:
    left: float
    right: float
    before: tuple
    after: tuple


@dataclass(frozen=True)
class SweepResult:
    parameter: str
    base: ModelParams
    points: tuple
    transitions: tuple = field(default=())

    @property
    def grid(self) -> np.ndarray:
        return np.array([pt.value for pt in self.points])

    def analyzed(self) -> list:
        return [pt for pt in self.points if pt.analysis is not None]


def sweep(parameter: str, value_range, n_points: int, base: ModelParams, log: bool = False) -> SweepResult:
    lo, hi = value_range
    if n_points < 1:
        raise ValueError("n_points must be positive")
    if n_points == 1:
        grid = np.array([float(lo)])
    elif log:
        grid = np.geomspace(lo, hi, n_points)
    else:
        grid = np.linspace(lo, hi, n_points)
    if np.any(np.diff(grid) <= 0):
        raise ValueError("sweep grid must be strictly increasing")
    points = []
    for v in grid:
        p = base.with_value(parameter, float(v))
        if not p.is_valid:
            raise InvalidParamsError([f"{parameter}={v!r}: " + "; ".join(p.violations)])
        try:
            points.append(SweepPoint(float(v), analyze(p), "ok"))
        except KnifeEdgeError as exc:
            points.append(SweepPoint(float(v), None, "knife_edge", str(exc)))
    ok = [pt for pt in points if pt.analysis is not None]
    if not ok:
        raise ValueError("no grid point could be analyzed")
    transitions = []
    for a, b in zip(ok, ok[1:]):
        sa, sb = sorted(a.analysis.stable_names), sorted(b.analysis.stable_names)
        if sa != sb:
            transitions.append(Transition(a.value, b.value, tuple(sa), tuple(sb)))
    return SweepResult(parameter, base, tuple(points), tuple(transitions))


@dataclass(frozen=True)
class ThetaShape:
    target: str
    grid: np.ndarray = field(repr=False)
    derivative: np.ndarray = field(repr=False)
    limit_point: np.ndarray = field(repr=False)  # target in the stable set at each grid value
    shape: str  # "decreasing_then_increasing" | "monotone_decreasing" | "monotone_increasing" | "other"
    theta_switch: float | None


def theta_upper(base: ModelParams) -> float:
    return min(1.0, 2 * base.beta / base.mu) - 1e-6


def _qss_derivative_theta(target, base, theta):
    from .limit import _qss, QSS_NAMES

    region = next(r for r, n in QSS_NAMES.items() if n == target)
    h = default_step(theta)
    up = base.with_value("theta", theta + h)
    dn = base.with_value("theta", theta - h)
    return (_qss(region, require_valid(up)) - _qss(region, require_valid(dn))) / (2 * h)


def theta_shape(target: str, base: ModelParams, grid=None) -> ThetaShape:
    """Locate the single sign change of d y*/d theta over the admissible range."""
    if target not in QSS_TARGETS:
        raise KeyError(target)
    top = theta_upper(base)
    if grid is None:
        grid = np.linspace(0.02, top - 2e-5, 120)
    grid = np.asarray(grid, dtype=float)
    if np.any(grid <= 0) or np.any(grid >= top):
        raise ValueError("theta grid outside (0, min(1, 2*beta/mu))")
    deriv = np.array([_qss_derivative_theta(target, base, t) for t in grid])
    limit = []
    for t in grid:
        try:
            limit.append(target in analyze(base.with_value("theta", t)).stable_names)
        except KnifeEdgeError:
            limit.append(False)
    signs = np.sign(deriv)
    changes = [k for k in range(len(grid) - 1) if signs[k] != signs[k + 1]]
    switch = None
    if not changes:
        shape = "monotone_decreasing" if signs[0] < 0 else "monotone_increasing"
    elif len(changes) == 1 and signs[changes[0]] < 0 < signs[changes[0] + 1]:
        shape = "decreasing_then_increasing"
        a, b = grid[changes[0]], grid[changes[0] + 1]
        while b - a > 1e-6:
            mid = 0.5 * (a + b)
            if _qss_derivative_theta(target, base, mid) < 0:
                a = mid
            else:
                b = mid
        switch = 0.5 * (a + b)
    else:
        shape = "other"
    return ThetaShape(target, grid, deriv, np.array(limit), shape, switch)


class BracketError(ValueError):
    pass


@dataclass(frozen=True)
class KappaBounds:
    kappa_1: float
    kappa_2: float
    grid: np.ndarray = field(repr=False)
    composition: tuple = field(repr=False)  # stable names at each grid point


def _stable_at(base: ModelParams, kappa: float):
    try:
        return analyze(base.with_value("kappa", kappa)).stable_names
    except KnifeEdgeError:
        return None


def kappa_bounds(base: ModelParams, search=(1e-3, 1e3), n_grid: int = 50) -> KappaBounds:
    """kappa_1: every kappa up to it gives S_F={y*_S}; kappa_2: every kappa from it gives S_F={y*_N}.

    Both are located on a log grid and refined by bisection on the classifier.
    """
    lo, hi = search
    s_only, n_only = frozenset({"y_s_star"}), frozenset({"y_n_star"})
    if _stable_at(base, lo) != s_only or _stable_at(base, hi) != n_only:
        raise BracketError("search range does not bracket the S-only and N-only regimes")
    grid = np.geomspace(lo, hi, n_grid)
    comp = [_stable_at(base, k) for k in grid]
    i1 = next(i for i, c in enumerate(comp) if c != s_only) - 1
    i2 = max(i for i, c in enumerate(comp) if c != n_only) + 1

    def refine(a, b, pred_left):
        while b - a > KAPPA_TOL:
            mid = 0.5 * (a + b)
            if pred_left(_stable_at(base, mid)):
                a = mid
            else:
                b = mid
        return a, b

    k1, _ = refine(grid[i1], grid[i1 + 1], lambda c: c == s_only)
    _, k2 = refine(grid[i2 - 1], grid[i2], lambda c: c != n_only)
    if not k1 < k2:
        raise BracketError(f"kappa_1={k1} not below kappa_2={k2}")
    return KappaBounds(k1, k2, grid, tuple(tuple(sorted(c)) if c is not None else None for c in comp))


def delta_slopes_s(base: ModelParams, near: tuple = (0.51, 0.99)) -> tuple:
    """Finite-difference slopes of y*_S in delta at the two ends of its range."""
    from .limit import _qss

    out = []
    for d in near:
        h = default_step(d)
        up = require_valid(base.with_value("delta", d + h))
        dn = require_valid(base.with_value("delta", d - h))
        out.append((_qss(Region.S, up) - _qss(Region.S, dn)) / (2 * h))
    return tuple(out)
