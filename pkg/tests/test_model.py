import math

import numpy as np
import pytest

from abpstab.model import (ReducedParams, StabilityClass, ValidationError, affine_state, classify_state,
                           law_from_config, lift_growth_rate, make_velocity_law, reduce_mode, zeta_of,
                           HomogeneousState)


def test_affine_default_values():
    law = make_velocity_law("affine", {"intercept": 1.0, "slope": -1.0})
    assert law.v(0.3) == pytest.approx(0.7)
    assert np.all(law.dv(np.linspace(0.1, 0.9, 5)) == -1.0)


def test_tabulated_increasing_law_rejected():
    rho = np.linspace(0, 1, 11)
    v = np.array([0.9, 0.85, 0.8, 0.75, 0.7, 0.75, 0.8, 0.5, 0.4, 0.3, 0.2])
    with pytest.raises(ValidationError, match="decreasing"):
        make_velocity_law("tabulated", {"rho": rho, "v": v})


def test_tabulated_smooth_law_accepted():
    rho = np.linspace(0, 1, 21)
    law = make_velocity_law("tabulated", {"rho": rho, "v": 0.9 * np.exp(-rho)})
    assert law.v(0.5) == pytest.approx(0.9 * math.exp(-0.5), rel=1e-4)
    assert law.dv(0.5) == pytest.approx(-0.9 * math.exp(-0.5), rel=1e-3)


def test_law_out_of_range_rejected():
    with pytest.raises(ValidationError):
        make_velocity_law("affine", {"intercept": 1.5, "slope": -1.0})


def test_law_from_config_table():
    law = law_from_config({"kind": "tabulated", "table": "0 0.9; 0.25 0.7; 0.5 0.5; 0.75 0.3; 1 0.1"})
    assert law.v(0.5) == pytest.approx(0.5)


@pytest.mark.parametrize("phi, zeta", [(0.5, 1 / (2 * math.pi)), (0.6, 3 / (4 * math.pi))])
def test_zeta_values(phi, zeta):
    assert zeta_of(affine_state(phi)) == pytest.approx(zeta, rel=1e-14)


def test_zeta_vanishes_at_low_density():
    assert zeta_of(affine_state(1e-9)) < 1e-9


@pytest.mark.parametrize("phi, label", [(0.6, StabilityClass.UNSTABLE), (0.4, StabilityClass.STABLE),
                                        (0.5, StabilityClass.MARGINAL)])
def test_classification(phi, label):
    assert classify_state(affine_state(phi)).label is label


def test_reduce_mode_rescaling():
    assert reduce_mode(affine_state(0.3), (0, 1)).nu == 0.0
    assert reduce_mode(affine_state(0.5), (0, 2), nu_physical=0.1).nu == pytest.approx(0.1)
    p = reduce_mode(affine_state(0.5), (3, 4), nu_physical=1.0)
    assert p.source_mode.time_scale == pytest.approx(0.5 * 5)
    with pytest.raises(ValueError):
        reduce_mode(affine_state(0.5), (0, 0))


def test_lift_growth_rate():
    s = affine_state(0.6)
    assert lift_growth_rate(0.5, s, (1, 0)) == pytest.approx(0.2)
    assert lift_growth_rate(0.0, s, (3, 4), kappa=0.1) == pytest.approx(-2.5)


def test_spatial_diffusion_suppresses_short_waves():
    s = affine_state(0.6)
    kappa = 0.05
    rates = [lift_growth_rate(1 / math.sqrt(3), s, (k, 0), kappa).real for k in range(1, 30)]
    cutoff = 0.4 / math.sqrt(3) / kappa  # v |k| lambda = kappa |k|^2
    assert all((r < 0) == (k > cutoff) for k, r in zip(range(1, 30), rates))


def test_params_invariants():
    with pytest.raises(ValidationError):
        ReducedParams(0.0)
    with pytest.raises(ValidationError):
        ReducedParams(0.1, -1e-3)
    with pytest.raises(ValidationError):
        HomogeneousState(1.0, make_velocity_law())
