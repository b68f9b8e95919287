import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from ransim.config import ScenarioSpec
from ransim.topology import build_topology

settings.register_profile("default", max_examples=60, deadline=None,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def paper_topology():
    return build_topology(ScenarioSpec(), np.random.default_rng(0))


@pytest.fixture
def small_spec():
    """A short run that still crosses two orchestration epochs."""
    return ScenarioSpec(n_slots=240, warmup_slots=40, n_ues=60)
