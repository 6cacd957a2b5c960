"""
Pytest configuration and shared fixtures
"""

import os
import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent.parent))

from categorical import CategoricalImage, DirichletImage, one_hot  # noqa: E402
from utils.config import get_config  # noqa: E402


def random_simplex(rng: np.random.Generator, shape, channels: int, sharpness: float = 1.0) -> np.ndarray:
    """Random per-pixel distributions; sharpness < 1 pushes mass toward the vertices"""
    data = rng.dirichlet(np.full(channels, sharpness), size=shape)
    return data / data.sum(axis=-1, keepdims=True)


@pytest.fixture
def rng():
    """Seeded generator so every run sees the same random images"""
    return np.random.default_rng(20240611)


@pytest.fixture
def fresh_config(monkeypatch):
    """Reload the config singleton around a test that edits the environment"""
    saved_env = dict(os.environ)
    get_config(reload=True)
    yield monkeypatch
    monkeypatch.undo()
    os.environ.clear()
    os.environ.update(saved_env)
    get_config(reload=True)


@pytest.fixture
def uniform_image():
    """4x4 image of (1/3, 1/3, 1/3)"""
    return CategoricalImage(np.full((4, 4, 3), 1.0 / 3.0))


@pytest.fixture
def line_image():
    """1-D [(1,0,0), (0,.5,.5), (0,0,1)]"""
    return CategoricalImage(np.array([[1.0, 0.0, 0.0], [0.0, 0.5, 0.5], [0.0, 0.0, 1.0]]))


@pytest.fixture
def plateau_line():
    """1-D one-hot [0, 0, 1]"""
    return one_hot(np.array([0, 0, 1]), 3)


@pytest.fixture
def random_image(rng):
    """8x8 random categorical image with 3 channels"""
    return CategoricalImage(random_simplex(rng, (8, 8), 3))


@pytest.fixture
def random_dirichlet(rng):
    """8x8 random Dirichlet parameter image with 3 channels"""
    return DirichletImage(rng.uniform(0.1, 5.0, size=(8, 8, 3)))


# Pytest configuration
def pytest_configure(config):
    """Configure pytest with custom markers"""
    config.addinivalue_line(
        "markers", "slow: marks tests as slow (deselect with '-m \"not slow\"')"
    )
    config.addinivalue_line(
        "markers", "integration: marks end-to-end tests that touch the filesystem or CLI"
    )
    config.addinivalue_line(
        "markers", "unit: marks unit tests"
    )
    config.addinivalue_line(
        "markers", "laws: marks randomized algebraic-law suites"
    )
