import numpy as np
import pytest
from hypothesis import settings

from jmatrix1d import _backend

settings.register_profile("default", max_examples=40, deadline=None)
settings.load_profile("default")

BACKENDS = _backend.implementations()


@pytest.fixture(params=sorted(BACKENDS))
def kernels(request):
    """Each importable kernel implementation in turn."""
    return BACKENDS[request.param]


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)
