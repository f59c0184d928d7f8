"""
Parameters, platform state and the enums shared by every other module.

A model is fixed by seven numbers (rho, kappa, theta, mu, beta, delta, lambda).
``ModelParams`` may be constructed with any values so that ``validate`` can
report what is wrong with them; every public analysis routine refuses params
that fail validation.
"""

from __future__ import annotations

import dataclasses
import json
from dataclasses import dataclass
from enum import Enum
from functools import cached_property

import numpy as np

# absolute tolerance on root residuals
TOL = 1e-12
# two landmarks closer than this are treated as coinciding
KNIFE_EDGE_TOL = 1e-9

PARAM_NAMES = ("rho", "kappa", "theta", "mu", "beta", "delta", "lambda")


class InvalidParamsError(ValueError):
    def __init__(self, violations):
        self.violations = list(violations)
        super().__init__("invalid model parameters: " + "; ".join(self.violations))


class KnifeEdgeError(ValueError):
    """Two landmarks (thresholds or quasi steady states) coincide."""

    def __init__(self, message, landmarks=()):
        self.landmarks = tuple(landmarks)
        super().__init__(message)


class Evocativeness(Enum):
    M = "M"  # mildly interesting
    I = "I"  # very interesting  # noqa: E741


class Region(Enum):
    N = "N"  # no sharing
    I = "I"  # share very interesting T' stories only  # noqa: E741
    M = "M"  # share mildly interesting T' stories only
    S = "S"  # share every T' story

    @property
    def code(self) -> int:
        return _REGION_CODES[self]

    @classmethod
    def from_code(cls, code: int) -> "Region":
        return REGIONS[code]


REGIONS = (Region.N, Region.I, Region.M, Region.S)
_REGION_CODES = {r: i for i, r in enumerate(REGIONS)}


@dataclass(frozen=True)
class ModelParams:
    rho: float
    kappa: float
    theta: float
    mu: float
    beta: float
    delta: float
    lam: float

    @classmethod
    def from_tuple(cls, values) -> "ModelParams":
        """Build from (rho, kappa, theta, mu, beta, delta, lambda)."""
        return cls(*(float(v) for v in values))

    @classmethod
    def from_dict(cls, data: dict) -> "ModelParams":
        unknown = sorted(set(data) - set(PARAM_NAMES))
        missing = [k for k in PARAM_NAMES if k not in data]
        problems = [f"unknown key {k!r}" for k in unknown]
        problems += [f"missing key {k!r}" for k in missing]
        if problems:
            raise InvalidParamsError(problems)
        values = []
        for k in PARAM_NAMES:
            v = data[k]
            if isinstance(v, bool) or not isinstance(v, (int, float)):
                raise InvalidParamsError([f"{k} must be a number, got {v!r}"])
            values.append(float(v))
        return cls(*values)

    @classmethod
    def from_json(cls, text: str) -> "ModelParams":
        try:
            data = json.loads(text)
        except json.JSONDecodeError as exc:
            raise InvalidParamsError([f"malformed JSON: {exc}"]) from None
        if not isinstance(data, dict):
            raise InvalidParamsError(["params JSON must be an object"])
        return cls.from_dict(data)

    def as_tuple(self) -> tuple:
        return (self.rho, self.kappa, self.theta, self.mu, self.beta, self.delta, self.lam)

    def as_array(self) -> np.ndarray:
        return np.array(self.as_tuple(), dtype=np.float64)

    def as_dict(self) -> dict:
        return dict(zip(PARAM_NAMES, self.as_tuple()))

    def to_json(self) -> str:
        return json.dumps(self.as_dict(), sort_keys=False)

    def get(self, name: str) -> float:
        return self.as_dict()[name]

    def with_value(self, name: str, value: float) -> "ModelParams":
        """Copy with one parameter replaced; ``name`` uses the JSON spelling."""
        if name not in PARAM_NAMES:
            raise KeyError(name)
        field = "lam" if name == "lambda" else name
        return dataclasses.replace(self, **{field: float(value)})

    @cached_property
    def violations(self) -> tuple:
        return tuple(_violations(self))

    @property
    def is_valid(self) -> bool:
        return not self.violations


def _violations(p: ModelParams):
    out = []
    for name, v in p.as_dict().items():
        if not np.isfinite(v):
            out.append(f"{name} must be finite")
    if out:
        return out
    for name in ("rho", "kappa", "mu", "beta"):
        if p.get(name) <= 0:
            out.append(f"{name} > 0")
    if not 0 < p.theta < 1:
        out.append("theta in (0,1)")
    if not 0 < p.lam < 1:
        out.append("lambda in (0,1)")
    if not 0.5 < p.delta < 1:
        out.append("delta in (1/2,1)")
    if 0 < p.lam and not p.mu > (1 - p.lam) / p.lam:
        out.append("assumption 1: mu > (1-lambda)/lambda")
    if not p.mu * p.theta < 2 * p.beta:
        out.append("assumption 2: mu*theta < 2*beta")
    return out


def validate(params: ModelParams) -> list:
    """Return the list of violated constraints; empty means valid."""
    return list(params.violations)


def require_valid(params: ModelParams) -> ModelParams:
    if params.violations:
        raise InvalidParamsError(params.violations)
    return params


@dataclass(frozen=True)
class PlatformState:
    t_count: float
    f_count: float

    @property
    def total(self) -> float:
        return self.t_count + self.f_count

    @property
    def share(self) -> float:
        total = self.total
        if not total > 0:
            raise ValueError("share of true stories undefined on an empty platform")
        return self.t_count / total

    @classmethod
    def from_share(cls, y: float, total: float) -> "PlatformState":
        return cls(y * total, (1.0 - y) * total)


def random_params(rng: np.random.Generator) -> ModelParams:
    """Draw valid params from a broad distribution used by property checks."""
    while True:
        rho = float(np.exp(rng.uniform(np.log(0.1), np.log(30.0))))
        kappa = float(np.exp(rng.uniform(np.log(0.1), np.log(20.0))))
        theta = float(rng.uniform(0.05, 0.98))
        lam = float(rng.uniform(0.2, 0.98))
        delta = float(rng.uniform(0.51, 0.99))
        mu_min = (1 - lam) / lam
        mu = float(mu_min * rng.uniform(1.02, 4.0) + rng.uniform(0.0, 0.5))
        beta = float(0.5 * mu * theta * rng.uniform(1.02, 5.0))
        p = ModelParams(rho, kappa, theta, mu, beta, delta, lam)
        if p.is_valid:
            return p
