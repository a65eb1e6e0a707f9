import numpy as np
import pytest

from ndhinf import numerics


@pytest.fixture(params=numerics.available_backends())
def backend(request):
    """Run a test once per available Jacobi kernel."""
    previous = numerics.BACKEND
    numerics.set_backend(request.param)
    yield request.param
    numerics.set_backend(previous)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)

