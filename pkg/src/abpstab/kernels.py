"""Mixing kernels and stability margins.

Green kernel of the inviscid stable problem (0 < zeta < 1/(2 pi)):

    G(t) = 2 zeta * int_{-1}^{1} sin(s t) s sqrt(1 - s^2) / (a s^2 + b) ds,
    a = 4 pi zeta - 1,   b = (1 - 2 pi zeta)^2,

whose Laplace transform is 1/D - 1, so that rho = S + G * S.  The diffusive
Volterra kernel is K(t) = int exp(-L t)[i sin], with Laplace transform
int (lambda + L)^{-1}[i sin], and rho - zeta K * rho = int exp(-L t) f_in.
"""
from __future__ import annotations

import json
import logging
import math
import warnings
from dataclasses import asdict, dataclass, field

import numpy as np

from .evolution import TimeSeries, free_transport_density
from .fourier import FourierField, nodes, to_coeffs, to_nodes
from .spectral import (ConditioningError, OperatorConfig, Propagator, d_nu, gamma_nu, laplace_k,
                       unit_rhs)
from .volterra import SampledKernel, trapezoid_convolve

logger = logging.getLogger(__name__)

ZETA_CRITICAL = 1.0 / (2.0 * math.pi)
IM_SPLIT = 1.0 + math.sqrt(2.0)


class AccuracyError(RuntimeError):
    pass


def _green_coefficients(zeta: float):
    if not 0.0 < zeta < ZETA_CRITICAL:
        raise ValueError("green kernel defined for 0 < zeta < 1/(2 pi)")
    a = 4.0 * math.pi * zeta - 1.0
    b = (1.0 - 2.0 * math.pi * zeta) ** 2
    if min(b, a + b) <= 0.0:
        raise ValueError("denominator a s^2 + b not positive on [-1, 1]")
    return a, b


def _chebyshev2(n: int):
    k = np.arange(1, n + 1)
    ang = k * np.pi / (n + 1)
    return np.cos(ang), np.pi / (n + 1) * np.sin(ang) ** 2


def _green_raw(zeta, ts, n):
    a, b = _green_coefficients(zeta)
    s, w = _chebyshev2(n)
    g = w * s / (a * s * s + b)
    vals = -2j * zeta * (np.exp(1j * np.outer(ts, s)) @ g)
    return vals


def green_kernel(zeta: float, t, accuracy: float = 1e-12, max_nodes: int = 2 ** 16):
    """G(t) by Gauss-Chebyshev quadrature of the second kind.

    The weight sqrt(1 - s^2) is absorbed by the rule; the node count starts
    at 8 + 4 ceil(t_max) and doubles until successive values agree to
    ``accuracy``.
    """
    ts = np.atleast_1d(np.asarray(t, dtype=float))
    if np.any(ts < 0):
        raise ValueError("t must be nonnegative")
    n = 8 + 4 * int(math.ceil(ts.max() if ts.size else 0.0))
    n = max(n, 32)
    prev = _green_raw(zeta, ts, n)
    while True:
        n *= 2
        cur = _green_raw(zeta, ts, n)
        if np.max(np.abs(cur - prev)) < accuracy:
            break
        if n >= max_nodes:
            raise AccuracyError(f"green kernel not converged to {accuracy} with {n} nodes")
        prev = cur
    if np.max(np.abs(cur.imag)) > 1e-10:
        raise AccuracyError("green kernel lost its real symmetry")
    out = cur.real
    return float(out[0]) if np.ndim(t) == 0 else out


def green_kernel_nodes(zeta: float, t, n: int):
    """G(t) with a fixed node count (for refinement studies)."""
    ts = np.atleast_1d(np.asarray(t, dtype=float))
    return _green_raw(zeta, ts, n).real


def density_via_convolution(zeta: float, f_in: FourierField, time_grid) -> TimeSeries:
    """rho(t) = S(t) + (G * S)(t) with the trapezoidal convolution."""
    t = np.asarray(time_grid, dtype=float)
    h = t[1] - t[0]
    if np.any(np.abs(np.diff(t) - h) > 1e-9 * max(1.0, t[-1])) or t[0] != 0.0:
        raise ValueError("time grid must be uniform and start at 0")
    S = free_transport_density(f_in, t)
    if not np.any(S):
        return TimeSeries(t, np.zeros_like(S), metadata={"method": "convolution"})
    G = green_kernel(zeta, t)
    rho = S + trapezoid_convolve(G.astype(complex), S, h)
    return TimeSeries(t, rho, metadata={"method": "convolution", "h": h})


# --------------------------------------------------------------------------
# diffusive kernels


def _grid_steps(grid, dt):
    t = np.asarray(grid, dtype=float)
    h = t[1] - t[0]
    if t[0] != 0.0 or np.any(np.abs(np.diff(t) - h) > 1e-9 * max(1.0, t[-1])):
        raise ValueError("time grid must be uniform and start at 0")
    dt = dt or min(h, 0.01)
    sub = max(1, int(math.ceil(h / dt - 1e-9)))
    return t, sub, h / sub


def _moment_histories(config: OperatorConfig, profiles, grid, dt=None):
    """int exp(-L t) g and int sin exp(-L t) g on the grid for each nodal profile g."""
    t, sub, step = _grid_steps(grid, dt)
    v = np.array(profiles, dtype=complex)
    N = config.N
    if config.nu == 0.0:
        # exact phase factor; pad the grid so exp(-i t sin) stays resolved
        N2 = N + int(math.ceil(t[-1])) + 40
        c = np.zeros(v.shape[:-1] + (2 * N2 + 1,), dtype=complex)
        c[..., N2 - N:N2 + N + 1] = to_coeffs(v)
        v, N = to_nodes(c), N2
    M = 2 * N + 1
    w = 2.0 * np.pi / M
    sn = np.sin(nodes(N))
    out = np.empty((t.size, v.shape[0], 2), dtype=complex)
    if config.nu == 0.0:
        for j, tj in enumerate(t):
            vj = np.exp(-1j * sn * tj) * v
            out[j, :, 0] = vj.sum(axis=-1) * w
            out[j, :, 1] = (sn * vj).sum(axis=-1) * w
        return t, out
    prop = Propagator(config, step)
    out[0, :, 0] = v.sum(axis=-1) * w
    out[0, :, 1] = (sn * v).sum(axis=-1) * w
    for j in range(1, t.size):
        v = prop.run(v, sub)
        out[j, :, 0] = v.sum(axis=-1) * w
        out[j, :, 1] = (sn * v).sum(axis=-1) * w
    return t, out


def volterra_kernel(config: OperatorConfig, time_grid, dt: float | None = None) -> SampledKernel:
    """K(t) = int exp(-L t)[i sin] sampled on a uniform grid."""
    t = np.asarray(time_grid, dtype=float)
    if config.nu == 0.0:
        # the phase mixing is exact; pick enough nodes for the largest time
        N = max(config.N, int(math.ceil(t.max())) + 64)
        f = FourierField(unit_rhs(N, "isin"))
        vals = free_transport_density(f, t)
        return SampledKernel(t, vals, "volterra_scalar")
    sn = np.sin(nodes(config.N))
    t, hist = _moment_histories(config, [1j * sn], t, dt)
    return SampledKernel(t, hist[:, 0, 0], "volterra_scalar")


def model_b_kernel(config: OperatorConfig, time_grid, dt: float | None = None) -> SampledKernel:
    """Matrix kernel [[-K1, K2], [-K3, K4]] of the (rho, p) system.

    K1 = int e^{-Lt}[i sin], K2 = int e^{-Lt}[i], K3 = int sin e^{-Lt}[i sin],
    K4 = int sin e^{-Lt}[i].
    """
    sn = np.sin(nodes(config.N))
    t, hist = _moment_histories(config, [1j * sn, 1j * np.ones_like(sn)], time_grid, dt)
    K1, K3 = hist[:, 0, 0], hist[:, 0, 1]
    K2, K4 = hist[:, 1, 0], hist[:, 1, 1]
    vals = np.stack([np.stack([-K1, K2], -1), np.stack([-K3, K4], -1)], -2)
    return SampledKernel(t, vals, "volterra_matrix")


def forcing_moments(config: OperatorConfig, f_in: FourierField, time_grid, dt: float | None = None):
    """(int exp(-L t) f_in, int sin exp(-L t) f_in) on the grid, shape (n, 2)."""
    f = f_in.resized(config.N) if f_in.N != config.N else f_in
    t, hist = _moment_histories(config, [to_nodes(f.coeffs)], time_grid, dt)
    return hist[:, 0, :]


def kernel_laplace(lam, config: OperatorConfig):
    """Laplace transform of K at lambda via one resolvent solve per point."""
    return laplace_k(lam, config)


def laplace_of_samples(kernel: SampledKernel, lams):
    from .volterra import sampled_laplace

    return sampled_laplace(kernel, lams)


# --------------------------------------------------------------------------
# stability margins


@dataclass
class RegionMin:
    value: float
    re: float
    im: float


@dataclass
class MarginReport:
    zeta: float
    nu: float
    delta: float
    im_max: float
    resolution: tuple
    quantity: str
    minima: dict
    floor: float | None = None
    below_floor: list = field(default_factory=list)
    zero_cells: list = field(default_factory=list)
    failures: list = field(default_factory=list)
    re_grid: np.ndarray | None = field(default=None, repr=False)
    im_grid: np.ndarray | None = field(default=None, repr=False)
    values: np.ndarray | None = field(default=None, repr=False)

    @property
    def strip_min(self) -> float:
        vals = [self.minima[k].value for k in ("strip_high", "strip_low") if k in self.minima]
        return min(vals) if vals else float("nan")

    def to_dict(self) -> dict:
        return {
            "zeta": self.zeta, "nu": self.nu, "delta": self.delta, "im_max": self.im_max,
            "resolution": list(self.resolution), "quantity": self.quantity,
            "minima": {k: asdict(v) for k, v in self.minima.items()},
            "floor": self.floor,
            "below_floor": [[float(z.real), float(z.imag)] for z in self.below_floor],
            "zero_cells": [[float(z.real), float(z.imag)] for z in self.zero_cells],
            "failures": [[float(z.real), float(z.imag)] for z in self.failures],
        }

    def to_json(self, path) -> None:
        with open(path, "w") as fh:
            json.dump(self.to_dict(), fh, indent=2, sort_keys=True)

    def heatmap_rows(self):
        for i, im in enumerate(self.im_grid):
            for j, re in enumerate(self.re_grid):
                yield float(re), float(im), float(np.abs(self.values[i, j]))


def _safe_eval(evaluator, lam):
    """Evaluate on a grid, falling back to points when a chunk fails."""
    failures = []
    try:
        return np.asarray(evaluator(lam), dtype=complex), failures
    except ConditioningError:
        out = np.empty(lam.shape, dtype=complex)
        for idx, z in np.ndenumerate(lam):
            try:
                out[idx] = complex(evaluator(np.array([z]))[0])
            except ConditioningError:
                out[idx] = np.nan
                failures.append(complex(z))
        return out, failures


def _winding_cells(re, im, vals):
    """Lower-left corners of grid cells around which the values wind."""
    v = vals
    corners = [v[:-1, :-1], v[:-1, 1:], v[1:, 1:], v[1:, :-1]]
    total = np.zeros(corners[0].shape)
    for a, b in zip(corners, corners[1:] + corners[:1]):
        total += np.angle(b / a)
    wind = np.rint(total / (2.0 * np.pi))
    wind = np.nan_to_num(wind)
    idx = np.argwhere(wind != 0)
    return [complex(0.5 * (re[j] + re[j + 1]), 0.5 * (im[i] + im[i + 1])) for i, j in idx]


def _scan(evaluator, zeta, config, delta, im_max, resolution, re_max, floor, quantity, refine=True):
    n_re, n_im = resolution
    if config.nu > 0 and delta > 0:
        n_strip = max(4, n_re // 2)
        re = np.concatenate([np.linspace(-delta, 0.0, n_strip, endpoint=False),
                             np.linspace(0.0, re_max, n_re - n_strip)])
    else:
        re = np.linspace(1e-3 if config.nu == 0 else 0.0, re_max, n_re)
    im = np.linspace(-im_max, im_max, n_im)
    lam = re[None, :] + 1j * im[:, None]
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        vals, failures = _safe_eval(evaluator, lam)
        pts = [(lam.ravel(), vals.ravel())]
        if refine:
            # finer patches around the branch points +-i
            rr = np.linspace(re[0], min(re_max, 0.2), max(8, n_re // 4))
            for c in (1.0, -1.0):
                ii = np.linspace(c - 0.2, c + 0.2, max(8, n_im // 4))
                patch = rr[None, :] + 1j * ii[:, None]
                pv, pf = _safe_eval(evaluator, patch)
                failures += pf
                pts.append((patch.ravel(), pv.ravel()))
    allz = np.concatenate([p[0] for p in pts])
    allv = np.abs(np.concatenate([p[1] for p in pts]))
    regions = {
        "strip_high": (allz.real < 0) & (np.abs(allz.imag) >= IM_SPLIT),
        "strip_low": (allz.real < 0) & (np.abs(allz.imag) < IM_SPLIT),
        "right": allz.real >= 0,
    }
    minima = {}
    for name, sel in regions.items():
        sel = sel & np.isfinite(allv)
        if np.any(sel):
            k = np.argmin(np.where(sel, allv, np.inf))
            minima[name] = RegionMin(float(allv[k]), float(allz[k].real), float(allz[k].imag))
    below = [complex(z) for z, v in zip(allz, allv) if floor is not None and v < floor]
    return MarginReport(zeta, config.nu, delta, im_max, tuple(resolution), quantity, minima, floor, below,
                        _winding_cells(re, im, vals), failures, re, im, vals)


def stability_margin_scan(zeta: float, config: OperatorConfig, delta: float, im_max: float = 6.0,
                          resolution=(400, 400), re_max: float = 0.5, floor: float | None = None,
                          refine: bool = True) -> MarginReport:
    """Grid scan of |1 - zeta L[K](lambda)| over {-delta <= Re <= re_max, |Im| <= im_max}."""
    return _scan(lambda z: d_nu(zeta, z, config), zeta, config, delta, im_max, resolution, re_max, floor,
                 "abs(1 - zeta L[K])", refine)


def model_b_margin(zeta: float, config: OperatorConfig, delta: float, im_max: float = 6.0,
                   resolution=(400, 400), re_max: float = 0.5, floor: float | None = None,
                   refine: bool = True) -> MarginReport:
    """Same scan for det(I + zeta L[Kmat](lambda)) of model B."""
    return _scan(lambda z: gamma_nu(zeta, z, config), zeta, config, delta, im_max, resolution, re_max, floor,
                 "abs(det(I + zeta L[Kmat]))", refine)
