"""Shared fixtures for the test suite."""

import numpy as np
import pytest

from ldrlle import gen_open_ring, knn


@pytest.fixture(scope="session")
def ring16():
    return gen_open_ring(16)


@pytest.fixture(scope="session")
def ring16_graph(ring16):
    return knn(ring16.points, 4)


@pytest.fixture()
def rng():
    return np.random.default_rng(20260814)
