import numpy as np
import pytest
from hypothesis import HealthCheck, settings

settings.register_profile("desk", deadline=None, max_examples=60, suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("desk")

SWEEP = (-8.0, -2.0, -0.5, 0.5, 2.0, 8.0, np.inf, -np.inf)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
