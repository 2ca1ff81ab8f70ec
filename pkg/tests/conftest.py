import numpy as np
import pytest


@pytest.fixture
def gen() -> np.random.Generator:
    return np.random.default_rng(20240817)
