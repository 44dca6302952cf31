import os

import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from qspforge import kernels
from qspforge._accel import NUMBA_AVAILABLE

settings.register_profile(
    "default", max_examples=60, deadline=None, suppress_health_check=[HealthCheck.too_slow]
)
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "default"))

BACKENDS = ["numpy"] + (["numba"] if NUMBA_AVAILABLE else [])


@pytest.fixture(params=BACKENDS)
def backend(request):
    previous = kernels.get_backend()
    kernels.set_backend(request.param)
    yield request.param
    kernels.set_backend(previous)


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)
