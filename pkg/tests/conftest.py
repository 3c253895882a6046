import math

import numpy as np
import pytest

from fracspec.operators import BackendSpec, build_backend


@pytest.fixture(scope="session")
def interval_pi():
    return build_backend(BackendSpec("interval_analytic", length=math.pi, modes=30))


@pytest.fixture(scope="session")
def oscillator_fd():
    return build_backend(BackendSpec("oscillator_fd", length=12.0, grid=2000, modes=20))


@pytest.fixture(scope="session")
def oscillator_analytic():
    return build_backend(BackendSpec("oscillator_analytic", modes=20))


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
