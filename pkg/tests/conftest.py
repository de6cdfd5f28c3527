from __future__ import annotations

import numpy as np
import pytest

from src.phantom import default_scene


@pytest.fixture(scope="session")
def scene():
    return default_scene()


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(1234)
