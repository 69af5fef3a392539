import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import special

from abpstab import bessel


@pytest.mark.parametrize("n", [0, 1, 2, 5, 17])
def test_against_scipy(n):
    t = np.concatenate([np.linspace(0, 12, 241), np.linspace(12.01, 600, 500)])
    assert np.max(np.abs(bessel.jn(n, t) - special.jv(n, t))) < 1e-11


def test_known_values():
    assert bessel.j0(0.0) == 1.0
    assert bessel.j1(0.0) == 0.0
    # first zero of J0
    assert abs(bessel.j0(2.404825557695773)) < 1e-14


@settings(max_examples=60, deadline=None)
@given(st.floats(0.1, 300.0), st.integers(1, 12))
def test_recurrence(t, n):
    lhs = bessel.jn(n - 1, t) + bessel.jn(n + 1, t)
    assert abs(lhs - 2 * n / t * bessel.jn(n, t)) < 1e-10 * max(1.0, 2 * n / t)
