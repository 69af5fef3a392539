import numpy as np
import pytest

from abpstab.evolution import evolve_model_b, evolve_reduced
from abpstab.fourier import FourierField
from abpstab.io import read_csv, write_csv
from abpstab.model import ReducedParams
from abpstab.spectral import OperatorConfig
from abpstab.volterra import (PreconditionError, SampledKernel, VolterraSystem, fixed_point_solve,
                              kernel_from_rows, kernel_to_rows, paley_wiener_check, resolvent_kernel,
                              sampled_laplace, solve_density_volterra, solve_model_b_volterra, solve_volterra,
                              volterra_residual, weighted_decay_transfer)

from conftest import ZETA_STABLE


def exp_system(h, T=5.0):
    t = np.arange(0.0, T + h / 2, h)
    return t, VolterraSystem(SampledKernel(t, np.exp(-t)), np.ones_like(t))


def test_zero_kernel_is_identity():
    t = np.linspace(0, 3, 31)
    f = np.sin(t) + 1j
    sys0 = VolterraSystem(SampledKernel(t, np.zeros_like(t)), f)
    assert np.array_equal(solve_volterra(sys0), f)
    R = resolvent_kernel(sys0)
    assert not np.any(R.values)


def test_exponential_kernel_exact_solution():
    t, system = exp_system(1e-3)
    u = solve_volterra(system)
    assert np.max(np.abs(u - 0.5 * (1 + np.exp(-2 * t)))) < 1e-6
    assert volterra_residual(system, u) < 1e-12
    R = resolvent_kernel(system)
    assert np.max(np.abs(R.values - np.exp(-2 * t))) < 1e-6
    assert R.defect < 1e-12 and R.right_defect < 1e-12
    assert np.max(np.abs(solve_volterra(system, "resolvent") - u)) < 1e-6


def test_second_order_convergence():
    errs = []
    for h in (0.02, 0.01):
        t, system = exp_system(h)
        errs.append(np.max(np.abs(solve_volterra(system) - 0.5 * (1 + np.exp(-2 * t)))))
    assert 3.5 < errs[0] / errs[1] < 4.5


def test_diagonal_matrix_kernel_decouples():
    t = np.linspace(0, 4, 201)
    k1, k2 = np.exp(-t), 0.3 * np.cos(t)
    Km = np.zeros((t.size, 2, 2), dtype=complex)
    Km[:, 0, 0], Km[:, 1, 1] = k1, k2
    F = np.stack([np.ones_like(t), t], -1)
    U = solve_volterra(VolterraSystem(SampledKernel(t, Km, "volterra_matrix"), F))
    u1 = solve_volterra(VolterraSystem(SampledKernel(t, k1), F[:, 0]))
    u2 = solve_volterra(VolterraSystem(SampledKernel(t, k2), F[:, 1]))
    assert np.allclose(U[:, 0], u1, atol=1e-13) and np.allclose(U[:, 1], u2, atol=1e-13)


def test_fixed_point_agrees_with_marching():
    t = np.linspace(0, 2, 101)
    system = VolterraSystem(SampledKernel(t, 0.2 * np.exp(-t)), np.cos(t))
    assert np.max(np.abs(fixed_point_solve(system) - solve_volterra(system))) < 1e-12


def test_grid_validation():
    t = np.array([0.0, 0.1, 0.3])
    with pytest.raises(ValueError):
        VolterraSystem(SampledKernel(t, np.ones(3)), np.ones(3))
    with pytest.raises(ValueError):
        SampledKernel(t, np.ones(2))


def test_weighted_transfer():
    t, system = exp_system(0.01, T=20.0)
    uw, dev = weighted_decay_transfer(system, 0.5)
    assert dev < 1e-7
    u = solve_volterra(system)
    assert np.allclose(weighted_decay_transfer(system, 0.0)[0], u, atol=1e-15)
    with pytest.raises(PreconditionError):
        weighted_decay_transfer(system, 1.5)


def test_sampled_laplace_exponential():
    t = np.arange(0, 30.0 + 0.01, 0.02)
    K = SampledKernel(t, np.exp(-t))
    lams = np.array([0.3, 1 + 2j, 0.1 - 5j])
    assert np.max(np.abs(sampled_laplace(K, lams) - 1 / (lams + 1))) < 1e-7


def test_paley_wiener_pass_and_fail():
    t = np.arange(0, 25.0 + 0.01, 0.01)
    grid = np.linspace(0, 3, 31)[None, :] + 1j * np.linspace(-4, 4, 81)[:, None]
    good = paley_wiener_check(SampledKernel(t, np.exp(-t)), grid)
    assert good.passed and good.winding == 0
    # 1 + L[-2 e^{-t}] = (lambda - 1)/(lambda + 1) vanishes at lambda = 1
    bad = paley_wiener_check(SampledKernel(t, -2 * np.exp(-t)), grid)
    assert not bad.passed and bad.winding == 1 and abs(bad.argmin - 1) < 0.1
    with pytest.raises(PreconditionError):
        paley_wiener_check(SampledKernel(t[:200], np.exp(-t[:200])), grid)


def test_density_volterra_matches_evolution():
    f0 = FourierField.from_modes({0: 1.0, 1: 0.4j, -3: 0.2}, 32)
    t = np.linspace(0, 10, 1001)
    cfg = OperatorConfig(0.02, 32)
    rho = solve_density_volterra(ZETA_STABLE, cfg, f0, t)
    ev = evolve_reduced(ReducedParams(ZETA_STABLE, 0.02), f0, 10.0, dt=0.01)
    assert np.max(np.abs(rho - ev.rho)) < 1e-3
    U = solve_model_b_volterra(ZETA_STABLE, cfg, f0, t)
    evb = evolve_model_b(ReducedParams(ZETA_STABLE, 0.02), f0, 10.0, dt=0.01)
    assert np.max(np.abs(U[:, 0] - evb.rho)) < 1e-3 and np.max(np.abs(U[:, 1] - evb.p)) < 1e-3


def test_uncoupled_density_is_forcing():
    f0 = FourierField.from_modes({0: 1.0, 2: 0.5}, 16)
    t = np.linspace(0, 5, 51)
    cfg = OperatorConfig(0.05, 16)
    from abpstab.kernels import forcing_moments
    assert np.allclose(solve_density_volterra(0.0, cfg, f0, t), forcing_moments(cfg, f0, t)[:, 0], atol=1e-15)


def test_kernel_csv_round_trip(tmp_path):
    t = np.linspace(0, 1, 11)
    Km = np.arange(44).reshape(11, 2, 2) * (1 + 0.5j)
    K = SampledKernel(t, Km, "volterra_matrix")
    path = tmp_path / "k.csv"
    write_csv(path, ["t"] + [f"c{i}" for i in range(8)], kernel_to_rows(K))
    _, rows = read_csv(path)
    back = kernel_from_rows(rows, "volterra_matrix")
    assert np.array_equal(back.times, t) and np.array_equal(back.values, K.values)
