import numpy as np
import pytest
from hypothesis import settings

from zpotfs.grid import GridParams

settings.register_profile("default", deadline=None, max_examples=50)
settings.load_profile("default")

ACCEPTANCE_LINES = []


@pytest.fixture
def rng():
    return np.random.default_rng(20240601)


@pytest.fixture
def small_grid():
    return GridParams(M=8, N=4, l_max=1, k_max=1)


@pytest.fixture
def desk_grid():
    # M = N = 32 at 15 kHz, 4 GHz, 500 km/h: l_max = 1, k_max = 4
    return GridParams(M=32, N=32, l_max=1, k_max=4)


def crandn(rng, *shape):
    return (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) / np.sqrt(2)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
