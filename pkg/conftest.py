import os
import sys

import numpy as np
import pytest

sys.path.insert(0, os.path.dirname(os.path.abspath(__file__)))

from ion_cavity.model import measured_params  # noqa: E402
from sweep.registry import SampleCache  # noqa: E402


@pytest.fixture
def measured():
    return measured_params()


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture
def cache():
    return SampleCache()
