"""
Shared fixtures for the sirsv test suite
"""

import numpy as np
import pytest

from sirsv.model.params import EpidemicState, ModelParams
from sirsv.numerics.grid import TimeGrid


@pytest.fixture
def params() -> ModelParams:
    """Standard parameter values with eta = 0.7"""
    return ModelParams()


@pytest.fixture
def init() -> EpidemicState:
    """Standard initial state: s=0.98, v=0.01, i=0.01, r=0, x=0.1"""
    return EpidemicState()


@pytest.fixture
def sirs_init() -> EpidemicState:
    """No vaccination at all: v = 0 and a zero rate"""
    return EpidemicState(s=0.99, v=0.0, i=0.01, r=0.0, rate=0.0)


@pytest.fixture
def short_grid() -> TimeGrid:
    return TimeGrid(0.0, 20.0, 0.1)


@pytest.fixture
def tiny_grid() -> TimeGrid:
    return TimeGrid(0.0, 10.0, 0.5)


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(20240601)


def _draw_params(rng: np.random.Generator) -> ModelParams:
    return ModelParams(
        beta=rng.uniform(0.0, 1.0),
        gamma=rng.uniform(0.1, 0.5),
        omega=rng.uniform(0.0, 0.05),
        eta=rng.uniform(0.0, 1.0),
        m=rng.uniform(0.0, 2.0),
        c=rng.uniform(0.0, 2.0),
        k=rng.uniform(0.0, 0.5),
        c_v=rng.uniform(0.05, 1.0),
        u_max=rng.uniform(0.0, 0.1),
    )


@pytest.fixture
def random_params(rng):
    """Factory for valid parameter sets drawn over plausible ranges"""
    return lambda: _draw_params(rng)
