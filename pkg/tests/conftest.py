import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from ptmap import catalog

settings.register_profile(
    "ptmap", max_examples=40, deadline=None,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("ptmap")

ALL_NAMES = catalog.names()
NONABELIAN = [n for n in ALL_NAMES if n != "abelian2"]


@pytest.fixture
def rng():
    return np.random.default_rng(20240601)


@pytest.fixture(params=ALL_NAMES)
def entry(request):
    return catalog.load(request.param)


@pytest.fixture
def su2():
    return catalog.load("su2")


@pytest.fixture
def basis3():
    return np.eye(3)
