"""
Optimal attention, the payoff from sharing a T' story, and the two
indifference thresholds.

All functions accept a scalar or a numpy array for ``y``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.optimize import bisect

from .model import (
    KNIFE_EDGE_TOL,
    Evocativeness,
    KnifeEdgeError,
    ModelParams,
    Region,
    require_valid,
)

MAX_BISECT_ITER = 200
_XTOL = 1e-15


def _evoc(e) -> Evocativeness:
    return e if isinstance(e, Evocativeness) else Evocativeness(e)


def _denominator(y, e, p):
    # P(story has evocativeness e) up to the factor 1/2 on true stories
    q = p.delta if e is Evocativeness.I else 1.0 - p.delta
    return y + 2.0 * (1.0 - y) * q


def _gain(e, p):
    # veracity stake of an e-story: lambda*mu for M, lambda*mu - (1-lambda) for I
    if e is Evocativeness.I:
        return p.lam * p.mu - (1.0 - p.lam)
    return p.lam * p.mu


def _attention(y, e, p):
    q = p.delta if e is Evocativeness.I else 1.0 - p.delta
    return (1.0 - y) * q * p.theta * _gain(e, p) / (p.beta * _denominator(y, e, p))


def _utility(a, y, e, p):
    q = p.delta if e is Evocativeness.I else 1.0 - p.delta
    d = _denominator(y, e, p)
    false_mass = 2.0 * (1.0 - y) * q * p.theta
    if e is Evocativeness.I:
        base = (y + false_mass * ((1.0 - p.lam) - p.lam * p.mu)) / d
    else:
        base = p.lam * (y - p.mu * false_mass) / d
    return base + false_mass * _gain(e, p) / d * a - p.beta * a * a


def _value(y, e, p):
    q = p.delta if e is Evocativeness.I else 1.0 - p.delta
    d = _denominator(y, e, p)
    false_mass = 2.0 * (1.0 - y) * q * p.theta
    if e is Evocativeness.I:
        base = (y + false_mass * ((1.0 - p.lam) - p.lam * p.mu)) / d
    else:
        base = p.lam * (y - p.mu * false_mass) / d
    return base + p.beta * _attention(y, e, p) ** 2


def attention_level(y, e, params: ModelParams):
    """Attention maximising the payoff from sharing a T' story of evocativeness ``e``."""
    p = require_valid(params)
    e = _evoc(e)
    a = _attention(np.asarray(y, dtype=float) if np.ndim(y) else float(y), e, p)
    if not np.all((a >= 0.0) & (a <= 1.0)):
        raise AssertionError(f"attention outside [0,1] for {p}: {a}")
    return a


def sharing_utility(a, y, e, params: ModelParams):
    """Expected payoff from sharing on signal T' at attention ``a``, net of beta*a^2."""
    p = require_valid(params)
    return _utility(a, y, _evoc(e), p)


def value(y, e, params: ModelParams):
    """Payoff from sharing T' stories at the optimal attention level."""
    p = require_valid(params)
    return _value(y, _evoc(e), p)


@dataclass(frozen=True)
class Thresholds:
    y_hat_i: float
    y_hat_m: float
    params: ModelParams

    @property
    def intermediate_region(self) -> Region:
        return Region.I if self.y_hat_i < self.y_hat_m else Region.M

    @property
    def lower(self) -> float:
        return min(self.y_hat_i, self.y_hat_m)

    @property
    def upper(self) -> float:
        return max(self.y_hat_i, self.y_hat_m)


def threshold(e, params: ModelParams, bracket=(0.0, 1.0)) -> float:
    """Root of ``value(., e)``; the bracket must straddle the sign change."""
    p = require_valid(params)
    e = _evoc(e)
    lo, hi = bracket
    return bisect(lambda y: _value(y, e, p), lo, hi, xtol=_XTOL, maxiter=MAX_BISECT_ITER)


def thresholds(params: ModelParams) -> Thresholds:
    p = require_valid(params)
    y_i = threshold(Evocativeness.I, p)
    y_m = threshold(Evocativeness.M, p)
    if abs(y_i - y_m) < KNIFE_EDGE_TOL:
        raise KnifeEdgeError(
            f"thresholds coincide: y_hat_i={y_i!r}, y_hat_m={y_m!r}", ("y_hat_i", "y_hat_m")
        )
    return Thresholds(y_i, y_m, p)
