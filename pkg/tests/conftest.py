from __future__ import annotations

import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from pcalc.lattice import FinitePoset

settings.register_profile("pcalc", max_examples=40, deadline=None, suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("pcalc")


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def grid33():
    return FinitePoset.grid([3, 3])


@pytest.fixture
def grid22():
    return FinitePoset.grid([2, 2])
