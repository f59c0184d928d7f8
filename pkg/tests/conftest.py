import numpy as np
import pytest
from hypothesis import strategies as st

from storyurn.model import ModelParams, random_params

BASE = ModelParams(1, 1, 0.75, 1, 1, 0.7, 0.75)
CASE_I = ModelParams(20, 8, 0.9, 1, 1, 0.65, 0.55)  # y_hat_i < y_hat_m, flip across N|I
CASE_M = ModelParams(1, 2.4, 0.9, 1, 1, 0.9, 0.65)  # y_hat_m < y_hat_i, flip across M|S


@st.composite
def valid_params(draw):
    """Valid parameter vectors, built so both assumptions hold by construction."""
    rho = draw(st.floats(0.05, 30))
    kappa = draw(st.floats(0.05, 20))
    theta = draw(st.floats(0.05, 0.98))
    lam = draw(st.floats(0.2, 0.98))
    delta = draw(st.floats(0.51, 0.99))
    mu_min = (1 - lam) / lam
    mu = mu_min * draw(st.floats(1.02, 4.0)) + draw(st.floats(0.0, 0.5))
    beta = 0.5 * mu * theta * draw(st.floats(1.02, 5.0))
    return ModelParams(rho, kappa, theta, mu, beta, delta, lam)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def param_draws():
    rng = np.random.default_rng(2024)
    return [random_params(rng) for _ in range(200)]
