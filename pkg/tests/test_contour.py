import numpy as np
import pytest

from abpstab.contour import ContourError, argument_principle_count
from abpstab.dispersion import d_closed


def test_linear_function():
    assert argument_principle_count(lambda z: z - 0.3, 0, 1).count == 1


def test_polynomial_with_three_zeros():
    zc = argument_principle_count(lambda z: (z - 0.1) * (z + 0.2j) * (z - 0.5 + 0.5j), 0, 1)
    assert zc.count == 3 and zc.winding == 3


def test_zero_on_contour():
    with pytest.raises(ContourError):
        argument_principle_count(lambda z: z - 1.0, 0, 1)


def test_dispersion_counts():
    assert argument_principle_count(lambda z: d_closed(1 / np.pi, z), 0.5, 0.2).count == 1
    assert argument_principle_count(lambda z: d_closed(1 / (4 * np.pi), z), 1.0, 0.5).count == 0


def test_scalar_only_evaluator():
    assert argument_principle_count(lambda z: complex(z) ** 2, 0, 0.5, 64).count == 2
