import os
import sys

import hypothesis
import numpy as np
import pytest

sys.path.append(os.path.join(os.path.dirname(os.path.abspath(__file__)), '..', 'src'))

from complex_geometry import random_sphere_point
from extremal_flow import initial_covector

np.seterr(all="warn")

# fixtures below are stateless factories, safe to share across examples
_shared = dict(deadline=None, suppress_health_check=[hypothesis.HealthCheck.function_scoped_fixture])
hypothesis.settings.register_profile("dev", max_examples=50, **_shared)
hypothesis.settings.register_profile("fast", max_examples=5, **_shared)
hypothesis.settings.register_profile("debugger", report_multiple_bugs=False, **_shared)
hypothesis.settings.load_profile(os.getenv("HYPOTHESIS_PROFILE", "dev"))

# every reported charge below assumes the measured dω / g(J.,.) ratio
CHARGE_RATIO = 2.0


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def sphere_point(rng):
    return random_sphere_point(rng, 2)


@pytest.fixture
def make_covector():
    """Phase point on h = 1/2 with the given charge"""
    def build(n=2, charge=0.0, seed=0, direction=None):
        return initial_covector(n, charge, CHARGE_RATIO, direction=direction, seed=seed)
    return build
