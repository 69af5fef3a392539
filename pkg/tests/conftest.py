import math

import numpy as np
import pytest

from abpstab.fourier import smooth_random_field

ZETA_UNSTABLE = 1.0 / math.pi
ZETA_STABLE = 1.0 / (4.0 * math.pi)
ROOT_A = 1.0 / math.sqrt(3.0)  # zero of D for zeta = 1/pi
ROOT_B = 3.0 / math.sqrt(7.0)  # zero of Gamma for zeta = 1/pi


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture
def smooth_field(rng):
    return smooth_random_field(32, rng)
