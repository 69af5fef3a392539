import math
import warnings

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from abpstab.fourier import FourierField, TruncationWarning, mul_isin, nodes, to_coeffs, to_nodes


def test_round_trip(rng):
    c = rng.normal(size=33) + 1j * rng.normal(size=33)
    assert np.allclose(to_coeffs(to_nodes(c)), c, atol=1e-14)


def test_moments_of_known_functions():
    N = 8
    f = FourierField.from_function(lambda th: 1 + 3 * np.sin(th) + np.cos(2 * th), N)
    assert f.integral() == pytest.approx(2 * math.pi)
    assert f.sin_moment() == pytest.approx(3 * math.pi)
    assert f.coefficient(1) == pytest.approx(-1.5j)
    assert f.coefficient(40) == 0


def test_isin_multiplication(rng):
    N = 20
    f = FourierField.from_function(lambda th: np.exp(np.cos(th)), N)
    g = FourierField(mul_isin(f.coeffs))
    exact = 1j * np.sin(nodes(N)) * np.exp(np.cos(nodes(N)))
    assert np.max(np.abs(g.nodal() - exact)) < 1e-12


def test_norms_parseval(smooth_field):
    v = smooth_field.nodal()
    M = v.size
    assert smooth_field.l2_norm() == pytest.approx(math.sqrt(2 * math.pi / M * np.sum(np.abs(v) ** 2)))
    assert smooth_field.h1_norm() >= smooth_field.l2_norm() / math.sqrt(2 * math.pi) - 1e-14


def test_evaluation_and_shift(smooth_field):
    th = np.linspace(0, 2 * np.pi, 7)
    alpha = 0.7
    assert np.allclose(smooth_field.shifted(alpha)(th), smooth_field(th - alpha), atol=1e-12)


def test_resize_preserves_low_modes(smooth_field):
    up = smooth_field.resized(64)
    assert np.allclose(up.resized(smooth_field.N).coeffs, smooth_field.coeffs)
    assert up.l2_norm() == pytest.approx(smooth_field.l2_norm())


def test_tail_warning():
    rough = FourierField(np.ones(17))
    with pytest.warns(TruncationWarning):
        rough.check_tail()
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        FourierField.from_modes({0: 1.0, 1: 0.5}, 16).check_tail()


def test_even_length_rejected():
    with pytest.raises(ValueError):
        FourierField(np.zeros(4))


@settings(max_examples=40, deadline=None)
@given(st.lists(st.complex_numbers(max_magnitude=10, allow_nan=False, allow_infinity=False), min_size=9, max_size=9))
def test_linearity(vals):
    a = FourierField(np.array(vals))
    b = FourierField(np.arange(9.0))
    assert np.allclose((2 * a + b).nodal(), 2 * a.nodal() + b.nodal())
