import pytest
from hypothesis import HealthCheck, settings

from phototherm import repro
from phototherm.basic_state import solve_basic_state

import fixtures

settings.register_profile(
    "numerics", deadline=None,
    suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("numerics")


@pytest.fixture(scope="session")
def engine():
    """Shared memoizing driver so acceptance tests reuse heavy analyses."""
    return repro.Engine(n_steps=2000, M=2000, workers=1)


@pytest.fixture(scope="session")
def deep_state():
    p = fixtures.deep(-500.0)
    return p, solve_basic_state(p, M=2000)


@pytest.fixture(scope="session")
def half065_state():
    p = fixtures.half(0.65, 0.0)
    return p, solve_basic_state(p, M=2000)


@pytest.fixture(scope="session")
def slow_state():
    p = fixtures.slow(0.0)
    return p, solve_basic_state(p, M=2000)


@pytest.fixture(scope="session")
def half068_state():
    p = fixtures.half(0.68, 0.0)
    return p, solve_basic_state(p, M=2000)
