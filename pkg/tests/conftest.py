import os
import sys

import numpy as np
import pytest

sys.path.insert(0, os.path.dirname(os.path.dirname(os.path.abspath(__file__))))

from Framework.ServiceDistribution import make_distribution  # noqa: E402


@pytest.fixture
def exp1():
    return make_distribution('exp', mu=1.0)


@pytest.fixture
def rng():
    return np.random.default_rng(20240601)
