import numpy as np
import pytest

from fpxlap import build_mesh


@pytest.fixture
def mesh16():
    return build_mesh(2.0, 16, [(-1.0, 1.0)])


@pytest.fixture
def mesh64():
    return build_mesh(2.0, 64, [(-1.0, 1.0)])


@pytest.fixture
def mesh256():
    return build_mesh(2.0, 256, [(-1.0, 1.0)])


@pytest.fixture
def rng():
    return np.random.default_rng(2024)
