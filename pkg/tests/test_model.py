import json

import numpy as np
import pytest
from hypothesis import given

from storyurn.model import (
    PARAM_NAMES,
    InvalidParamsError,
    ModelParams,
    PlatformState,
    Region,
    random_params,
    require_valid,
    validate,
)

from conftest import BASE, valid_params


def test_base_point_is_valid():
    # mu > (1-lambda)/lambda = 1/3 and mu*theta = 0.75 < 2*beta = 2
    assert validate(BASE) == []


@pytest.mark.parametrize("changes, fragment", [
    ({"lam": 0.2, "mu": 1.0}, "assumption 1"),
    ({"theta": 1.0}, "theta in (0,1)"),
    ({"theta": 0.0}, "theta in (0,1)"),
    ({"delta": 0.5}, "delta in (1/2,1)"),
    ({"delta": 1.0}, "delta in (1/2,1)"),
    ({"lam": 1.0}, "lambda in (0,1)"),
    ({"rho": 0.0}, "rho > 0"),
    ({"kappa": -1.0}, "kappa > 0"),
    ({"beta": 0.3}, "assumption 2"),
])
def test_violations_are_reported(changes, fragment):
    import dataclasses

    p = dataclasses.replace(BASE, **changes)
    problems = validate(p)
    assert any(fragment in v for v in problems), problems
    with pytest.raises(InvalidParamsError) as info:
        require_valid(p)
    assert info.value.violations == problems


def test_nan_is_rejected():
    p = BASE.with_value("mu", float("nan"))
    assert validate(p) == ["mu must be finite"]


def test_validate_is_pure():
    p = ModelParams(1, 1, 0.75, 0.2, 1, 0.7, 0.3)
    assert validate(p) == validate(p) == validate(ModelParams(*p.as_tuple()))


def test_json_round_trip_uses_lambda_key():
    d = json.loads(BASE.to_json())
    assert list(d) == list(PARAM_NAMES)
    assert d["lambda"] == 0.75
    assert ModelParams.from_json(BASE.to_json()) == BASE


@pytest.mark.parametrize("text", [
    '{"rho": 1}',
    '{"rho":1,"kappa":1,"theta":0.75,"mu":1,"beta":1,"delta":0.7,"lambda":0.75,"extra":2}',
    '{"rho":"1","kappa":1,"theta":0.75,"mu":1,"beta":1,"delta":0.7,"lambda":0.75}',
    '{"rho":true,"kappa":1,"theta":0.75,"mu":1,"beta":1,"delta":0.7,"lambda":0.75}',
    "[1, 2, 3]",
    "{not json",
])
def test_malformed_json_is_rejected(text):
    with pytest.raises(InvalidParamsError):
        ModelParams.from_json(text)


def test_with_value_and_get():
    p = BASE.with_value("lambda", 0.6)
    assert p.lam == 0.6 and p.get("lambda") == 0.6
    assert BASE.lam == 0.75
    with pytest.raises(KeyError):
        BASE.with_value("lam", 0.5)


def test_params_are_immutable():
    with pytest.raises(Exception):
        BASE.rho = 2.0


def test_platform_state_share():
    s = PlatformState(1.0, 9.0)
    assert s.total == 10.0 and s.share == pytest.approx(0.1)
    with pytest.raises(ValueError):
        PlatformState(0.0, 0.0).share
    assert PlatformState.from_share(0.25, 100).t_count == 25.0


def test_region_codes_round_trip():
    for r in Region:
        assert Region.from_code(r.code) is r
    assert [r.code for r in (Region.N, Region.I, Region.M, Region.S)] == [0, 1, 2, 3]


def test_random_params_are_valid_and_seeded():
    a = [random_params(np.random.default_rng(7)) for _ in range(3)]
    assert a[0] == a[1] == a[2]
    rng = np.random.default_rng(8)
    assert all(random_params(rng).is_valid for _ in range(500))


@given(valid_params())
def test_strategy_generates_valid_params(p):
    assert p.is_valid
