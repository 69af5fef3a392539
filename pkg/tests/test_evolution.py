import math

import numpy as np
import pytest

from abpstab.evolution import (BlowUpError, FitError, TimeSeries, evolve_model_b, evolve_reduced,
                               fit_rate, free_transport_bessel, free_transport_density, rotation_invariance_check,
                               semigroup_series)
from abpstab.fourier import FourierField, smooth_random_field
from abpstab.model import ReducedParams, affine_state
from abpstab.spectral import OperatorConfig, propagate_semigroup

from conftest import ROOT_A, ROOT_B, ZETA_STABLE, ZETA_UNSTABLE


def test_uncoupled_matches_semigroup(smooth_field):
    s = semigroup_series(0.02, smooth_field, 5.0, dt=0.01)
    exact = propagate_semigroup(OperatorConfig(0.02, 32), smooth_field, 5.0)
    assert s.rho[-1] == pytest.approx(exact.integral(), abs=1e-9)
    assert s.l2norm[-1] == pytest.approx(exact.l2_norm(), abs=1e-9)


@pytest.mark.parametrize("evolve, root", [(evolve_reduced, ROOT_A), (evolve_model_b, ROOT_B)])
def test_growth_rate_matches_root(evolve, root, rng):
    f0 = smooth_random_field(32, rng)
    T = 20.0 / root
    s = evolve(ReducedParams(ZETA_UNSTABLE), f0, T, dt=0.01, N=64)
    est = fit_rate(s, window=(T / 2, T))
    assert abs(est.rate - root) < 1e-3


def test_model_b_bounded_when_stable(smooth_field):
    s = evolve_model_b(ReducedParams(ZETA_STABLE), smooth_field, 100.0, dt=0.02, N=64, sample_every=5)
    assert np.max(s.l2norm) <= 2.0 * s.l2norm[0]


def test_blowup_carries_partial_series():
    f0 = FourierField.from_modes({0: 1.0, 1: 0.5}, 32)
    with pytest.raises(BlowUpError) as info:
        evolve_reduced(ReducedParams(ZETA_UNSTABLE), f0, 80.0, dt=0.01)
    assert info.value.series.times[-1] < 80.0


def test_zero_datum_rejected():
    with pytest.raises(ValueError):
        evolve_reduced(ReducedParams(ZETA_STABLE), FourierField.zeros(16), 1.0)


def test_free_transport_routes_agree():
    f0 = FourierField.from_modes({0: 1.0, 2: 0.3, -1: 0.2j}, 16)
    t = np.linspace(0, 40, 81)
    assert np.max(np.abs(free_transport_density(f0, t) - free_transport_bessel(f0, t))) < 1e-12


def test_free_transport_cos_vanishes_and_decays():
    cos = FourierField.from_function(np.cos, 16)
    assert np.max(np.abs(free_transport_density(cos, np.linspace(0, 50, 51)))) < 1e-13
    bump = FourierField.from_function(lambda th: np.exp(np.cos(th - 0.4)), 32)
    t = np.linspace(0, 200, 801)
    assert np.max(np.sqrt(1 + t) * np.abs(free_transport_density(bump, t))) < 10.0


def test_fit_rate_synthetic():
    t = np.linspace(0, 10, 201)
    s = TimeSeries(t, np.exp(0.5 * t), l2norm=np.exp(0.5 * t))
    assert fit_rate(s).rate == pytest.approx(0.5, abs=1e-12)
    t = np.linspace(0, 200, 2001)
    s = TimeSeries(t, (1 + t) ** -0.5)
    assert fit_rate(s, "algebraic", envelope=0.0).rate == pytest.approx(-0.5, abs=1e-10)
    with pytest.raises(FitError):
        fit_rate(TimeSeries(t[:5], np.ones(5), l2norm=np.ones(5)))


@pytest.mark.parametrize("alpha", [0.0, math.pi / 2, math.pi])
def test_rotation_invariance(alpha, smooth_field):
    state = affine_state(0.3)
    assert rotation_invariance_check(state, (1.0, 0.5), alpha, smooth_field, T=1.0, dt=0.01) < 1e-10


def test_time_series_validation():
    with pytest.raises(ValueError):
        TimeSeries([0.0, 0.0], [1, 2])
    with pytest.raises(ValueError):
        TimeSeries([0.0, 1.0], [1])
