import math
import warnings

import numpy as np
import pytest

from abpstab.dispersion import d_closed, gamma_closed
from abpstab.fourier import FourierField, TruncationWarning
from abpstab.spectral import (ConditioningError, OperatorConfig, apply_operator, d_nu, diffusive_eigenfunction,
                              diffusive_root, eigen_residual, energy_defect, gamma_nu, laplace_k, leading_eigenvalue,
                              model_b_diffusive_matrix, model_b_diffusive_root, propagate_semigroup, resolvent_solve,
                              semigroup_norm_decay, semigroup_rate, solve_batch, unit_rhs)

from conftest import ROOT_A, ROOT_B, ZETA_STABLE, ZETA_UNSTABLE


def test_inviscid_resolvent_exact_division():
    N = 96
    cfg = OperatorConfig(0.0, N)
    g = FourierField(unit_rhs(N, "isin"))
    f = resolvent_solve(1.0, cfg, g)
    th = np.linspace(0, 2 * np.pi, 50)
    assert np.max(np.abs(f(th) - 1j * np.sin(th) / (1 + 1j * np.sin(th)))) < 1e-9


def test_round_trip(smooth_field):
    cfg = OperatorConfig(0.03, 64)
    lam = 0.2 - 0.4j
    f = resolvent_solve(lam, cfg, smooth_field)
    back = apply_operator(cfg, f.coeffs, lam)
    assert np.max(np.abs(back - smooth_field.resized(64).coeffs)) < 1e-10
    assert np.all(resolvent_solve(lam, cfg, FourierField.zeros(64)).coeffs == 0)


def test_batch_matches_single():
    cfg = OperatorConfig(0.01, 48)
    lams = np.array([[0.5, 1 + 1j], [0.1 - 2j, 3.0]])
    c = solve_batch(lams, cfg, unit_rhs(48, "one"))
    for idx in np.ndindex(lams.shape):
        single = resolvent_solve(lams[idx], cfg, FourierField(unit_rhs(48, "one"))).coeffs
        assert np.allclose(c[idx], single, atol=1e-13)


@pytest.mark.filterwarnings("ignore::RuntimeWarning")
def test_singular_point_raises():
    cfg = OperatorConfig(0.0, 16)
    with pytest.raises(ConditioningError):
        resolvent_solve(0.0, cfg, FourierField(unit_rhs(16, "one")))


def test_small_truncation_warns():
    with pytest.warns(TruncationWarning):
        OperatorConfig(0.1, 8)


def test_dispersion_zeta_zero_and_inviscid_limit():
    cfg = OperatorConfig(0.0, 128)
    assert d_nu(0.0, 0.7, cfg) == 1
    lam = np.array([0.25, 1.0 + 1j, 2.0 - 3j])
    assert np.max(np.abs(d_nu(0.3, lam, cfg) - d_closed(0.3, lam))) < 1e-12
    assert np.max(np.abs(d_nu(0.3, lam, OperatorConfig(1e-6, 256)) - d_closed(0.3, lam))) < 1e-4


@pytest.mark.parametrize("lam", [0.5, ROOT_A])
def test_dispersion_linear_in_nu(lam):
    nus = np.array([1e-1, 1e-2, 1e-3])
    dev = [abs(d_nu(ZETA_UNSTABLE, lam, OperatorConfig(nu, 256)) - d_closed(ZETA_UNSTABLE, lam)) for nu in nus]
    slope = np.polyfit(np.log(nus), np.log(dev), 1)[0]
    assert 0.8 <= slope <= 1.2


def test_root_continuation():
    cfg0 = OperatorConfig(0.0, 64)
    assert diffusive_root(ZETA_UNSTABLE, cfg0, seed=0.42).roots[0] == 0.42
    nus = np.array([1e-1, 1e-2, 1e-3, 1e-4])
    lams = []
    for nu in nus:
        rep = diffusive_root(ZETA_UNSTABLE, OperatorConfig(nu, 256))
        assert rep.counts == [1] and rep.roots[0].real > 0
        lams.append(rep.roots[0])
    slope = np.polyfit(np.log(nus), np.log(np.abs(np.array(lams) - ROOT_A)), 1)[0]
    assert 0.9 <= slope <= 1.1


def test_diffusive_eigenfunction_residual():
    cfg = OperatorConfig(0.01, 128)
    lam = diffusive_root(ZETA_UNSTABLE, cfg).roots[0]
    f = diffusive_eigenfunction(ZETA_UNSTABLE, lam, cfg)
    assert f.integral() == pytest.approx(1.0, abs=1e-10)
    assert eigen_residual(ZETA_UNSTABLE, lam, cfg, f) < 1e-8


def test_model_b_diffusive():
    mat, det = model_b_diffusive_matrix(0.0, 1.0, OperatorConfig(0.01, 64))
    assert np.allclose(mat, np.eye(2)) and det == 1
    lam = 1.0 + 0.3j
    nus = np.array([1e-1, 1e-2, 1e-3])
    dev = [abs(gamma_nu(ZETA_UNSTABLE, lam, OperatorConfig(nu, 256)) - gamma_closed(ZETA_UNSTABLE, lam)) for nu in nus]
    assert 0.8 <= np.polyfit(np.log(nus), np.log(dev), 1)[0] <= 1.2
    rep = model_b_diffusive_root(ZETA_UNSTABLE, OperatorConfig(1e-3, 256))
    assert rep.roots[0].real > 0 and abs(rep.roots[0] - ROOT_B) < 1e-2


def test_dense_generator_agrees_with_roots():
    cfg = OperatorConfig(0.01, 64)
    assert leading_eigenvalue(ZETA_UNSTABLE, cfg) == pytest.approx(diffusive_root(ZETA_UNSTABLE, cfg).roots[0],
                                                                   abs=1e-10)
    assert leading_eigenvalue(ZETA_UNSTABLE, cfg, "B") == pytest.approx(
        model_b_diffusive_root(ZETA_UNSTABLE, cfg).roots[0], abs=1e-10)
    assert leading_eigenvalue(ZETA_STABLE, cfg).real < 0


def test_laplace_of_kernel_is_dispersion():
    cfg = OperatorConfig(0.02, 64)
    lam = np.array([0.3, 1 - 1j])
    assert np.allclose(1 - ZETA_STABLE * laplace_k(lam, cfg), d_nu(ZETA_STABLE, lam, cfg), atol=1e-14)


def test_semigroup_unitary_and_bessel():
    N = 64
    g = FourierField.from_function(lambda th: np.exp(np.sin(2 * th)), N)
    out = propagate_semigroup(OperatorConfig(0.0, N), g, 10.0)
    assert out.l2_norm() == pytest.approx(g.l2_norm(), abs=1e-10)
    assert propagate_semigroup(OperatorConfig(0.0, N), g, 0.0) is not None
    assert np.allclose(propagate_semigroup(OperatorConfig(0.0, N), g, 0.0).coeffs, g.coeffs)
    const = FourierField.from_modes({0: 1 / (2 * math.pi)}, 40)
    from abpstab.bessel import j0
    for t in (1.0, 7.5, 20.0):
        assert propagate_semigroup(OperatorConfig(0.0, 40), const, t).integral() == pytest.approx(j0(t), abs=1e-12)


def test_energy_identity(smooth_field):
    assert energy_defect(OperatorConfig(0.05, 32), smooth_field) < 1e-12


def test_enhanced_dissipation_ratio():
    r1 = semigroup_rate(1e-2).rate
    r4 = semigroup_rate(4e-2).rate
    assert abs(r1 / r4 - 0.5) <= 0.125
    assert abs(semigroup_rate(0.0, N=32).rate) < 1e-6


@pytest.mark.slow
def test_enhanced_dissipation_slope():
    _, slope = semigroup_norm_decay([1e-3, 3e-3, 1e-2, 3e-2, 1e-1])
    assert 0.4 <= slope <= 0.6
