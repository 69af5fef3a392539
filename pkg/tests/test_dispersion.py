import math
import warnings

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from abpstab import dispersion as dsp
from abpstab.dispersion import (CutError, MarginalParameterError, d_closed, d_quadrature, dispersion_closed_form,
                                dispersion_quadrature, gamma_closed, inviscid_root_value, inviscid_roots,
                                model_a_eigenfunction, model_b_coefficients, model_b_coefficients_quadrature,
                                model_b_eigenfunction, model_b_gamma, model_b_roots, rational_integral_oracle,
                                rational_integral_quadrature, resolvent_apply, resolvent_residual,
                                unstable_root_exists, weyl_residual)
from abpstab.fourier import FourierField

from conftest import ROOT_A, ROOT_B, ZETA_STABLE, ZETA_UNSTABLE


def test_closed_form_value():
    assert dispersion_closed_form(ZETA_STABLE, 1.0).value == pytest.approx(0.5 + 0.5 / math.sqrt(2), abs=1e-15)


def test_closed_form_vs_quadrature():
    assert abs(dispersion_quadrature(ZETA_STABLE, 1.0).value - (0.5 + 0.5 / math.sqrt(2))) < 1e-10


def test_root_value():
    assert inviscid_root_value(ZETA_UNSTABLE) == pytest.approx(ROOT_A, rel=1e-15)
    assert abs(d_closed(ZETA_UNSTABLE, ROOT_A)) < 1e-14


def test_half_is_not_a_root():
    # the value 1/2 for zeta = 1/pi does not solve D = 0
    assert abs(d_closed(ZETA_UNSTABLE, 0.5)) > 0.05


def test_large_lambda_limit():
    assert abs(d_closed(0.7, 1e6) - 1.0) < 1e-11


def test_zeta_zero_and_symmetry():
    lam = 0.3 + 0.8j
    assert d_closed(0.0, lam) == 1.0
    assert d_closed(0.2, lam) == pytest.approx(d_closed(0.2, -lam), abs=1e-14)


@pytest.mark.filterwarnings("ignore::abpstab.dispersion.NearCutWarning")
@settings(max_examples=80, deadline=None)
@given(st.floats(0.01, 3.0), st.floats(-4.0, 4.0), st.floats(0.0, 2.0))
def test_quadrature_matches_closed_form(re, im, zeta):
    lam = complex(re, im)
    n = int(min(max(512, 60 / re), 2 ** 15))
    assert abs(d_quadrature(zeta, lam, n) - d_closed(zeta, lam)) < 1e-9 * max(1, zeta)


def test_cut_rejected():
    with pytest.raises(CutError):
        d_closed(0.2, 0.5j)


def test_roots_report():
    rep = inviscid_roots(ZETA_UNSTABLE)
    assert rep.roots == pytest.approx([ROOT_A, -ROOT_A], abs=1e-14)
    assert rep.counts == [1, 1]
    assert inviscid_roots(ZETA_STABLE).roots == []
    with pytest.raises(MarginalParameterError):
        inviscid_roots(1 / (2 * math.pi))


def test_roots_shrink_to_zero_at_threshold():
    zs = 1 / (2 * math.pi) + np.array([1e-2, 1e-3, 1e-4])
    roots = [inviscid_roots(z).roots[0] for z in zs]
    assert roots[0] > roots[1] > roots[2] > 0
    assert roots[2] < 1e-3


def test_resolvent_average_identity(rng):
    N, lam = 32, 2.0
    H = FourierField(rng.normal(size=2 * N + 1) * 0.5 ** np.abs(np.arange(-N, N + 1)) + 0j)
    f = resolvent_apply(0.2, lam, H)
    direct = FourierField.from_nodes(H.nodal() / (lam + 1j * np.sin(2 * np.pi * np.arange(2 * N + 1) / (2 * N + 1))))
    assert f.integral() == pytest.approx(direct.integral() / d_closed(0.2, lam), abs=1e-12)
    assert resolvent_residual(0.2, lam, H, f) < 1e-9


def test_resolvent_zero():
    assert np.all(resolvent_apply(0.2, 1.0, FourierField.zeros(4)).coeffs == 0)


def test_weyl_sequence_rates():
    ns = 2 ** np.arange(3, 11)
    for zeta, lo, hi in ((0.2, -0.65, -0.40), (0.0, -0.65, -0.40)):
        r = [weyl_residual(zeta, 0.0, n) for n in ns]
        assert all(a > b for a, b in zip(r, r[1:]))
        slope = np.polyfit(np.log(ns), np.log(r), 1)[0]
        if zeta > 0:
            assert lo <= slope <= hi


def test_weyl_off_centre():
    assert weyl_residual(0.2, 0.6, 1024) < weyl_residual(0.2, 0.6, 16)


def test_model_b_coefficients():
    I, J, K = model_b_coefficients(1.0)
    assert J == pytest.approx(1j * math.pi * math.sqrt(2), abs=1e-14)
    assert K == pytest.approx(2j * math.pi - J, abs=1e-13)
    for lam in (0.3, 1.7, 12.0):
        I, J, K = model_b_coefficients(lam)
        assert abs(I.imag) < 1e-15 and 0 < I.real < 2 * math.pi
    lam = 0.4 - 0.9j
    assert np.allclose(model_b_coefficients(lam), model_b_coefficients_quadrature(lam, 4096), atol=1e-10)


def test_model_b_gamma():
    assert abs(gamma_closed(ZETA_UNSTABLE, ROOT_B)) < 1e-14
    assert abs(model_b_gamma(ZETA_UNSTABLE, ROOT_B, "quadrature", 1024).value) < 1e-12
    assert abs(gamma_closed(0.3, 1e7) - 1) < 1e-12
    lam = np.linspace(0.05, 5, 40)[:, None] + 1j * np.linspace(-5, 5, 41)[None, :]
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        assert np.min(np.abs(gamma_closed(ZETA_STABLE, lam))) > 0.1


def test_model_b_roots():
    rep = model_b_roots(ZETA_UNSTABLE)
    assert rep.roots[0] == pytest.approx(ROOT_B, abs=1e-13)
    assert model_b_roots(ZETA_STABLE).roots == []


def test_eigenfunctions_satisfy_equations():
    f = model_a_eigenfunction(ZETA_UNSTABLE, ROOT_A, 64)
    assert resolvent_residual(ZETA_UNSTABLE, ROOT_A, FourierField.zeros(64), f) < 1e-10
    g = model_b_eigenfunction(ZETA_UNSTABLE, ROOT_B, 64)
    assert g.integral() == pytest.approx(1.0)


def test_threshold_existence():
    assert unstable_root_exists(1 / (2 * math.pi) + 1e-6)
    assert not unstable_root_exists(1 / (2 * math.pi) - 1e-6)
    assert unstable_root_exists(1 / (2 * math.pi) + 1e-6, "B")


@pytest.mark.parametrize("z, value", [(0.0, math.pi), (1j, math.pi / math.sqrt(2)), (0.5, math.pi / math.sqrt(0.75))])
def test_rational_integral(z, value):
    assert rational_integral_oracle(z) == pytest.approx(value, abs=1e-14)
    assert abs(rational_integral_quadrature(z) - value) < 1e-9


def test_rational_integral_excluded_ray():
    with pytest.raises(ValueError):
        rational_integral_oracle(1.5)


def test_wrong_branch_is_detected(monkeypatch):
    monkeypatch.setattr(dsp, "_sqrt", lambda x: -np.sqrt(x))
    with pytest.raises(dsp.BranchError):
        d_closed(0.2, 0.7 + 0.1j)
