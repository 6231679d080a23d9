"""Shared fixtures: the canonical two-flux interface and the built-in models."""

import numpy as np
import pytest

from hetflux.families import heterogeneous_quadratic, lwr, quadratic, two_state
from hetflux.interface import InterfaceContext


@pytest.fixture(scope="session")
def pair_model():
    """Flux u^2/2 for x <= 0, u^2 for x > 0 (the worked two-flux example)."""
    return two_state(left_coefficient=0.5, right_coefficient=1.0, radius=0.5)


@pytest.fixture(scope="session")
def pair_ctx(pair_model):
    """Interface context (f_l = u^2/2, f_r = u^2) sampled outside the radius."""
    return InterfaceContext.from_model(pair_model, -1.0, 1.0)


@pytest.fixture(scope="session")
def hq_model():
    return heterogeneous_quadratic()


@pytest.fixture(scope="session")
def lwr_model():
    return lwr()


@pytest.fixture(scope="session")
def burgers_model():
    return quadratic(coefficient=0.5)


@pytest.fixture()
def rng():
    return np.random.default_rng(20240817)
