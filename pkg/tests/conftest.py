import numpy as np
import pytest


def rel_gap(a: float, b: float) -> float:
    scale = max(abs(a), abs(b))
    return 0.0 if scale == 0 else abs(a - b) / scale


@pytest.fixture
def rng():
    return np.random.default_rng(20260823)
