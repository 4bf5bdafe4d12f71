import numpy as np
import pytest
from hypothesis import HealthCheck, settings
from hypothesis import strategies as st

from uentropy.systems import FiniteSystem
from uentropy.uniform import Carrier, Entourage

settings.register_profile("default", deadline=None, max_examples=40,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")

ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(line)


@st.composite
def random_systems(draw, min_size=2, max_size=10):
    n = draw(st.integers(min_size, max_size))
    table = draw(st.lists(st.integers(0, n - 1), min_size=n, max_size=n))
    return FiniteSystem(Carrier(n), np.array(table))


@st.composite
def random_entourages(draw, size, density=0.3):
    seed = draw(st.integers(0, 2 ** 32 - 1))
    rng = np.random.default_rng(seed)
    rel = rng.random((size, size)) < density
    return Entourage(Carrier(size), rel)


@st.composite
def systems_with_nested_pair(draw, max_size=10):
    """A random system with entourages U inside V."""
    sys = draw(random_systems(max_size=max_size))
    V = draw(random_entourages(sys.size, 0.5))
    W = draw(random_entourages(sys.size, 0.5))
    U = Entourage(sys.carrier, V.relation & W.relation)
    return sys, U, V


def random_system(rng, n):
    return FiniteSystem(Carrier(n), rng.integers(0, n, size=n))


def random_entourage(rng, n, density):
    return Entourage(Carrier(n), rng.random((n, n)) < density)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
