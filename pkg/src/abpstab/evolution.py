"""Time integration of the reduced angular equations.

Model A:  f_t + i sin f - nu f'' = i zeta sin rho,              rho = int f
Model B:  f_t + i sin f - nu f'' = i zeta sin rho - i zeta p,   p = int sin f

The linear part is advanced with the Strang-split semigroup.  The nonlocal
source is a finite sum of fixed angular profiles times scalar moments of f,
handled by a midpoint rule on the Duhamel integral:

    f_{n+1} = S(dt) f_n + dt * S(dt/2) b(moments at t_n + dt/2)

with the midpoint moments taken from S(dt/2) f_n + (dt/2) b(moments at t_n).
The local error is O(dt^3), so the scheme is second order.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .bessel import jn
from .fourier import FourierField, modes, nodes, to_coeffs, to_nodes
from .model import HomogeneousState, ReducedParams
from .spectral import OperatorConfig, Propagator, RateEstimate

logger = logging.getLogger(__name__)

BLOWUP = 1e12


class BlowUpError(RuntimeError):
    def __init__(self, message: str, series: "TimeSeries"):
        super().__init__(message)
        self.series = series


class FitError(ValueError):
    pass


@dataclass
class TimeSeries:
    times: np.ndarray
    rho: np.ndarray
    p: np.ndarray | None = None
    l2norm: np.ndarray | None = None
    metadata: dict = field(default_factory=dict)

    def __post_init__(self):
        self.times = np.asarray(self.times, dtype=float)
        self.rho = np.asarray(self.rho, dtype=complex)
        n = self.times.size
        self.p = np.zeros(n, dtype=complex) if self.p is None else np.asarray(self.p, dtype=complex)
        if self.l2norm is not None:
            self.l2norm = np.asarray(self.l2norm, dtype=float)
        if self.rho.size != n or self.p.size != n or (self.l2norm is not None and self.l2norm.size != n):
            raise ValueError("time series arrays must have equal length")
        if n > 1 and np.any(np.diff(self.times) <= 0):
            raise ValueError("times must be strictly increasing")

    def __len__(self) -> int:
        return self.times.size

    def rows(self):
        norms = self.l2norm if self.l2norm is not None else np.full(len(self), np.nan)
        for t, r, q, n in zip(self.times, self.rho, self.p, norms):
            yield float(t), float(r.real), float(r.imag), float(q.real), float(q.imag), float(n)


def h1_norm(f: FourierField) -> float:
    return f.h1_norm()


def default_dt(lam_target: complex | None = None) -> float:
    if lam_target is None or lam_target == 0:
        return 0.01
    return min(0.01, 0.1 / abs(lam_target))


def _integrate(config: OperatorConfig, f_in: FourierField, T: float, dt: float, sources,
               multiplier=None, sample_every: int = 1, keep_fields: bool = False, scheme: str = ""):
    """Shared stepper.

    ``sources`` is a list of (profile, weight) nodal arrays; the source term is
    sum_j profile_j * int(weight_j f).
    """
    if T <= 0 or dt <= 0:
        raise ValueError("need T > 0 and dt > 0")
    n_steps = int(round(T / dt))
    if abs(n_steps * dt - T) > 1e-9 * max(1.0, T):
        n_steps = int(math.ceil(T / dt))
        dt = T / n_steps
    f_in = f_in.resized(config.N) if f_in.N != config.N else f_in
    M = config.size
    w = 2.0 * np.pi / M
    full = Propagator(config, dt, multiplier)
    half = Propagator(config, 0.5 * dt, multiplier)
    profiles = [np.asarray(pr, dtype=complex) for pr, _ in sources]
    weights = [np.asarray(wt, dtype=complex) * w for _, wt in sources]
    prop_profiles = [half.step(pr) for pr in profiles]

    def moments(v):
        return [np.sum(wt * v) for wt in weights]

    v = to_nodes(f_in.coeffs)
    norm0 = math.sqrt(w * np.sum(np.abs(v) ** 2))
    if norm0 == 0.0:
        raise ValueError("initial datum is zero")

    sin = np.sin(nodes(config.N))
    times, rho, pp, norms, fields = [], [], [], [], []

    def record(t, v):
        times.append(t)
        rho.append(np.sum(v) * w)
        pp.append(np.sum(sin * v) * w)
        norms.append(math.sqrt(w * np.sum(np.abs(v) ** 2)))
        if keep_fields:
            fields.append(to_coeffs(v))

    record(0.0, v)
    for n in range(1, n_steps + 1):
        if profiles:
            mom = moments(v)
            v_mid = half.step(v)
            for pr, mu in zip(profiles, mom):
                v_mid = v_mid + 0.5 * dt * mu * pr
            mom = moments(v_mid)
            v = full.step(v)
            for pr, mu in zip(prop_profiles, mom):
                v = v + dt * mu * pr
        else:
            v = full.step(v)
        if n % sample_every == 0 or n == n_steps:
            record(n * dt, v)
            if norms[-1] > BLOWUP * norm0:
                series = _series(times, rho, pp, norms, dt, config, scheme)
                raise BlowUpError(f"||f|| exceeded {BLOWUP:.0e} x initial at t = {n * dt:.3f}", series)
    series = _series(times, rho, pp, norms, dt, config, scheme)
    if keep_fields:
        return series, np.array(fields)
    return series


def _series(times, rho, pp, norms, dt, config, scheme):
    return TimeSeries(np.array(times), np.array(rho), np.array(pp), np.array(norms),
                      {"dt": dt, "N": config.N, "nu": config.nu, "scheme": scheme})


def evolve_reduced(params: ReducedParams, f_in: FourierField, T: float, dt: float = 0.01,
                   N: int | None = None, sample_every: int = 1) -> TimeSeries:
    """Integrate the reduced model A equation and record rho, p and ||f||."""
    config = OperatorConfig(params.nu, N or f_in.N)
    sin = np.sin(nodes(config.N))
    sources = [(1j * params.zeta * sin, np.ones_like(sin))]
    return _integrate(config, f_in, T, dt, sources, sample_every=sample_every, scheme="strang-midpoint/A")


def evolve_model_b(params: ReducedParams, f_in: FourierField, T: float, dt: float = 0.01,
                   N: int | None = None, sample_every: int = 1) -> TimeSeries:
    """Integrate the reduced model B equation (coupling through rho and p)."""
    config = OperatorConfig(params.nu, N or f_in.N)
    sin = np.sin(nodes(config.N))
    one = np.ones_like(sin)
    sources = [(1j * params.zeta * sin, one), (-1j * params.zeta * one, sin)]
    return _integrate(config, f_in, T, dt, sources, sample_every=sample_every, scheme="strang-midpoint/B")


def semigroup_series(nu: float, f_in: FourierField, T: float, dt: float = 0.01,
                     N: int | None = None, sample_every: int = 1) -> TimeSeries:
    """Uncoupled evolution exp(-L t) f_in, recorded like the coupled runs."""
    config = OperatorConfig(nu, N or f_in.N)
    return _integrate(config, f_in, T, dt, [], sample_every=sample_every, scheme="strang")


# --------------------------------------------------------------------------
# free transport


def free_transport_density(f_in: FourierField, t, chunk: int = 256):
    """S(t) = int exp(-i t sin) f_in by the trapezoidal rule.

    The node count grows with t so that the oscillating factor stays
    resolved (the rule is exact for trigonometric polynomials of degree
    below the node count).
    """
    ts = np.atleast_1d(np.asarray(t, dtype=float))
    if np.any(ts < 0):
        raise ValueError("t must be nonnegative")
    tmax = float(ts.max()) if ts.size else 0.0
    M = 2 * (f_in.N + int(math.ceil(tmax)) + 40) + 1
    vals = f_in.resized((M - 1) // 2).nodal()
    sn = np.sin(2.0 * np.pi * np.arange(M) / M)
    out = np.empty(ts.size, dtype=complex)
    for start in range(0, ts.size, chunk):
        tt = ts[start:start + chunk]
        out[start:start + chunk] = np.exp(-1j * np.outer(tt, sn)) @ vals * (2.0 * np.pi / M)
    return complex(out[0]) if np.ndim(t) == 0 else out


def free_transport_bessel(f_in: FourierField, t, max_modes: int = 32):
    """S(t) = 2 pi sum_m c_m J_m(t) (Jacobi-Anger), for data with few modes."""
    nz = [m for m in modes(f_in.N) if f_in.coefficient(m) != 0]
    if nz and max(abs(m) for m in nz) > max_modes:
        raise ValueError("Bessel route limited to data with few Fourier modes")
    ts = np.atleast_1d(np.asarray(t, dtype=float))
    out = np.zeros(ts.size, dtype=complex)
    for m in nz:
        out += f_in.coefficient(m) * jn(m, ts)
    out *= 2.0 * np.pi
    return complex(out[0]) if np.ndim(t) == 0 else out


# --------------------------------------------------------------------------
# rate fitting


def _block_maxima(t, y, block):
    edges = np.arange(t[0], t[-1] + block, block)
    tk, yk = [], []
    for a, b in zip(edges[:-1], edges[1:]):
        sel = (t >= a) & (t < b)
        if np.count_nonzero(sel) == 0:
            continue
        i = np.argmax(np.where(sel, y, -np.inf))
        tk.append(t[i])
        yk.append(y[i])
    return np.array(tk), np.array(yk)


def fit_rate(series: TimeSeries, model: str = "exponential", window=None, quantity: str | None = None,
             envelope: float | None = None) -> RateEstimate:
    """Fit an exponential rate or an algebraic exponent.

    exponential: slope of log(value) against t (positive means growth);
    algebraic: slope of log|rho| against log(1+t).  ``quantity`` selects
    ``norm``, ``rho`` or ``p`` (defaults: norm for exponential, rho for
    algebraic).  With ``envelope`` set, the fit uses the maxima over
    consecutive time blocks of that length, which removes the zeros of an
    oscillating signal.  Algebraic fits default to blocks of length 2 pi.
    """
    t = series.times
    if quantity is None:
        quantity = "norm" if model == "exponential" else "rho"
    if quantity == "norm":
        if series.l2norm is None:
            raise FitError("series has no norm record")
        y = series.l2norm
    elif quantity == "rho":
        y = np.abs(series.rho)
    elif quantity == "p":
        y = np.abs(series.p)
    else:
        raise ValueError(quantity)
    if window is not None:
        sel = (t >= window[0]) & (t <= window[1])
        t, y = t[sel], y[sel]
    if t.size < 10:
        raise FitError("need at least 10 samples in the fit window")
    if model == "algebraic" and envelope is None:
        envelope = 2.0 * math.pi
    if envelope:
        t, y = _block_maxima(t, y, envelope)
        if t.size < 3:
            raise FitError("too few envelope blocks in window")
    if np.any(y <= 0):
        raise FitError("nonpositive values in fit window")
    x = t if model == "exponential" else np.log1p(t)
    if model not in ("exponential", "algebraic"):
        raise ValueError(model)
    A = np.vstack([x, np.ones_like(x)]).T
    coef, *_ = np.linalg.lstsq(A, np.log(y), rcond=None)
    resid = float(np.sqrt(np.mean((A @ coef - np.log(y)) ** 2)))
    return RateEstimate(float(coef[0]), float(np.exp(coef[1])), (float(t[0]), float(t[-1])), resid)


# --------------------------------------------------------------------------
# rotational invariance of the un-reduced mode equation


def evolve_mode_fields(state: HomogeneousState, k: Sequence[float], g: FourierField, T: float,
                       dt: float, nu_physical: float = 0.0, sample_every: int = 10):
    """Integrate f_t + i v (k.e) f - nu f'' = -(phi v'/2pi) i (k.e) rho for a general k.

    Returns the recorded times and coefficient snapshots.
    """
    th = nodes(g.N)
    ke = k[0] * np.cos(th) + k[1] * np.sin(th)
    v = float(state.law.v(state.phi))
    coupling = -state.phi * float(state.law.dv(state.phi)) / (2.0 * math.pi)
    config = OperatorConfig(nu_physical, g.N)
    sources = [(1j * coupling * ke, np.ones_like(th))]
    series, fields = _integrate(config, g, T, dt, sources, multiplier=v * ke,
                                sample_every=sample_every, keep_fields=True, scheme="mode")
    return series.times, fields


def rotation_invariance_check(state: HomogeneousState, k: Sequence[float], alpha: float, g: FourierField,
                              T: float = 2.0, dt: float = 0.01, nu_physical: float = 0.0) -> float:
    """Max-in-time L2 distance between f_{R k}[g(. - alpha)](t) and f_k[g](t, . - alpha)."""
    k = (float(k[0]), float(k[1]))
    if k == (0.0, 0.0):
        raise ValueError("k must be nonzero")
    ca, sa = math.cos(alpha), math.sin(alpha)
    rk = (ca * k[0] - sa * k[1], sa * k[0] + ca * k[1])
    _, a = evolve_mode_fields(state, k, g, T, dt, nu_physical)
    _, b = evolve_mode_fields(state, rk, g.shifted(alpha), T, dt, nu_physical)
    shift = np.exp(-1j * modes(g.N) * alpha)
    diff = b - a * shift
    return float(np.max(np.sqrt(2.0 * np.pi * np.sum(np.abs(diff) ** 2, axis=1))))
