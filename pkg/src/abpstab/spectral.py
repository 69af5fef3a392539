"""Fourier-Galerkin form of L = i sin(theta) - nu d^2/dtheta^2.

In coefficient space, multiplication by i sin maps c_m to (c_{m-1} - c_{m+1})/2
and -nu d^2 multiplies c_m by nu m^2, so lambda + L is tridiagonal with
constant off-diagonals 1/2 and -1/2.  Solves use plain forward elimination
(no pivoting), batched over many lambda at once for scans.
"""
from __future__ import annotations

import logging
import math
import warnings
from dataclasses import dataclass

import numpy as np

from .contour import argument_principle_count
from .dispersion import DispersionValue, RootReport
from .fourier import (FourierField, TruncationWarning, integral, modes, sin_moment, to_coeffs,
                      to_nodes, nodes)

logger = logging.getLogger(__name__)

NU0 = 0.25
COND_LIMIT = 1e12
RESIDUAL_TOL = 1e-10
CHUNK = 2048


class ConditioningError(RuntimeError):
    def __init__(self, message: str, condition: float = math.inf):
        super().__init__(message)
        self.condition = condition


class NewtonError(RuntimeError):
    pass


class CertificateError(RuntimeError):
    pass


class WindowError(RuntimeError):
    pass


@dataclass(frozen=True)
class OperatorConfig:
    nu: float = 0.0
    N: int = 256

    def __post_init__(self):
        if self.nu < 0:
            raise ValueError("nu must be nonnegative")
        if self.N < 16:
            warnings.warn(f"truncation N={self.N} below the recommended minimum 16", TruncationWarning, stacklevel=3)

    @property
    def size(self) -> int:
        return 2 * self.N + 1

    def diagonal(self, lam):
        m = modes(self.N)
        return np.asarray(lam, dtype=complex)[..., None] + self.nu * m * m


@dataclass(frozen=True)
class RateEstimate:
    rate: float
    prefactor: float
    fit_window: tuple
    residual: float


# --------------------------------------------------------------------------
# tridiagonal elimination


def _thomas(diag: np.ndarray, rhs: np.ndarray, sub: complex = 0.5, sup: complex = -0.5):
    """Solve rows sub*x[k-1] + diag[k]*x[k] + sup*x[k+1] = rhs[k].

    ``diag`` and ``rhs`` have shape (B, n).  Returns (x, smallest |pivot|).
    """
    d = np.ascontiguousarray(diag.T)
    y = np.array(np.broadcast_to(rhs, diag.shape).T, dtype=complex)
    n = d.shape[0]
    w = np.empty_like(d)
    w[0] = d[0]
    prod = sub * sup
    for k in range(1, n):
        f = sub / w[k - 1]
        w[k] = d[k] - prod / w[k - 1]
        y[k] -= f * y[k - 1]
    x = np.empty_like(y)
    x[-1] = y[-1] / w[-1]
    for k in range(n - 2, -1, -1):
        x[k] = (y[k] - sup * x[k + 1]) / w[k]
    return x.T, np.min(np.abs(w), axis=0)


def _apply(diag: np.ndarray, x: np.ndarray, sub: complex = 0.5, sup: complex = -0.5):
    out = diag * x
    out[..., 1:] += sub * x[..., :-1]
    out[..., :-1] += sup * x[..., 1:]
    return out


def _condition_estimate(diag: np.ndarray) -> float:
    """1-norm condition number estimate (Hager's method) for one system."""
    n = diag.size
    d = diag[None, :]
    norm_a = float(np.max(np.abs(diag)) + 1.0)
    x = np.full(n, 1.0 / n, dtype=complex)
    est = 0.0
    for _ in range(5):
        y = _thomas(d, x[None, :])[0][0]
        est = float(np.sum(np.abs(y)))
        xi = np.where(np.abs(y) > 0, y / np.maximum(np.abs(y), 1e-300), 1.0)
        z = _thomas(np.conj(d), xi[None, :], sub=-0.5, sup=0.5)[0][0]
        j = int(np.argmax(np.abs(z)))
        if np.abs(z[j]) <= np.real(np.vdot(z, x)):
            break
        x = np.zeros(n, dtype=complex)
        x[j] = 1.0
    return norm_a * est


def solve_batch(lams, config: OperatorConfig, rhs: np.ndarray) -> np.ndarray:
    """Coefficients of (lambda + L)^{-1} rhs for every lambda in ``lams``.

    ``rhs`` is a single coefficient vector of length 2N+1.  Returns shape
    lams.shape + (2N+1,).  Raises ConditioningError on a vanishing pivot.
    """
    lams = np.asarray(lams, dtype=complex)
    flat = lams.ravel()
    out = np.empty((flat.size, config.size), dtype=complex)
    for start in range(0, flat.size, CHUNK):
        sl = slice(start, start + CHUNK)
        diag = config.diagonal(flat[sl])
        x, piv = _thomas(diag, rhs)
        scale = np.max(np.abs(diag), axis=1) + 1.0
        bad = piv < 1e-14 * scale
        if np.any(bad):
            raise ConditioningError(f"vanishing pivot at lambda = {flat[sl][bad][0]}")
        out[sl] = x
    return out.reshape(lams.shape + (config.size,))


def unit_rhs(N: int, which: str) -> np.ndarray:
    """Coefficient vectors of the fixed right-hand sides sin, i sin, 1, i."""
    c = np.zeros(2 * N + 1, dtype=complex)
    if which == "sin":
        c[N + 1], c[N - 1] = -0.5j, 0.5j
    elif which == "isin":
        c[N + 1], c[N - 1] = 0.5, -0.5
    elif which == "one":
        c[N] = 1.0
    elif which == "i":
        c[N] = 1j
    else:
        raise ValueError(which)
    return c


def apply_operator(config: OperatorConfig, c: np.ndarray, lam: complex = 0.0) -> np.ndarray:
    """Coefficients of (lambda + L) f."""
    return _apply(config.diagonal(lam), np.asarray(c, dtype=complex))


def resolvent_solve(lam: complex, config: OperatorConfig, g: FourierField, check: bool = True) -> FourierField:
    """Solve (lambda + i sin - nu d^2) f = g.

    Checks the coefficient-space residual, estimates the condition number
    and warns when the highest retained modes are not negligible.
    """
    g = g.resized(config.N) if g.N != config.N else g
    diag = config.diagonal(complex(lam))
    if not np.any(g.coeffs):
        return FourierField.zeros(config.N)
    x, piv = _thomas(diag[None, :], g.coeffs[None, :])
    x = x[0]
    if check:
        cond = _condition_estimate(diag)
        if not np.isfinite(cond) or cond > COND_LIMIT:
            raise ConditioningError(f"resolvent system ill-conditioned at lambda={lam} (cond ~ {cond:.2e})", cond)
        res = _apply(diag, x) - g.coeffs
        rel = np.max(np.abs(res)) / max(np.max(np.abs(g.coeffs)), 1e-300)
        if rel > RESIDUAL_TOL:
            raise ConditioningError(f"resolvent residual {rel:.2e} at lambda={lam} (cond ~ {cond:.2e})", cond)
    f = FourierField(x)
    f.check_tail()
    return f


# --------------------------------------------------------------------------
# dispersion functionals


def d_nu(zeta: float, lams, config: OperatorConfig):
    """Vectorised 1 - i zeta int (lambda + L)^{-1}[sin]."""
    c = solve_batch(lams, config, unit_rhs(config.N, "sin"))
    out = 1.0 - 1j * zeta * integral(c)
    return complex(out) if np.ndim(out) == 0 else out


def laplace_k(lams, config: OperatorConfig):
    """Vectorised Laplace transform of the scalar kernel, int (lambda + L)^{-1}[i sin]."""
    c = solve_batch(lams, config, unit_rhs(config.N, "isin"))
    out = integral(c)
    return complex(out) if np.ndim(out) == 0 else out


def diffusive_dispersion(zeta: float, lam: complex, config: OperatorConfig) -> DispersionValue:
    return DispersionValue(complex(d_nu(zeta, lam, config)), "resolvent", config.N)


def model_b_entries(lams, config: OperatorConfig):
    """(iota, j, xi, ell) from resolvent solves against sin and 1."""
    cs = solve_batch(lams, config, unit_rhs(config.N, "sin"))
    c1 = solve_batch(lams, config, unit_rhs(config.N, "one"))
    iota = 1j * integral(cs)
    j = 1j * integral(c1)
    xi = 1j * sin_moment(cs)
    ell = 1j * sin_moment(c1)
    return iota, j, xi, ell


def gamma_nu(zeta: float, lams, config: OperatorConfig):
    iota, j, xi, ell = model_b_entries(lams, config)
    det = (1.0 - zeta * iota) * (1.0 + zeta * ell) + zeta * zeta * j * xi
    return complex(det) if np.ndim(det) == 0 else det


def model_b_diffusive_matrix(zeta: float, lam: complex, config: OperatorConfig):
    """I + zeta A for the diffusive model B problem, and its determinant."""
    iota, j, xi, ell = (complex(v) for v in model_b_entries(complex(lam), config))
    mat = np.eye(2, dtype=complex) + zeta * np.array([[-iota, j], [-xi, ell]])
    return mat, complex(np.linalg.det(mat))


# --------------------------------------------------------------------------
# roots


def _newton_complex(fun, lam: complex, max_iter: int = 50, tol: float = 1e-13):
    for it in range(max_iter):
        h = 1e-6 * max(1.0, abs(lam))
        f0, fp, fm = fun(np.array([lam, lam + h, lam - h]))
        step = f0 / ((fp - fm) / (2 * h))
        lam = lam - step
        if abs(step) < tol * max(1.0, abs(lam)):
            return lam, it + 1
    raise NewtonError(f"Newton did not converge in {max_iter} iterations (last lambda {lam})")


def certificate_radius(nu: float, seed: complex) -> float:
    """max(10 nu, 1e-3), kept inside the right half plane around the seed."""
    return min(max(10.0 * nu, 1e-3), 0.5 * abs(seed.real))


def diffusive_root(zeta: float, config: OperatorConfig, seed: complex | None = None,
                   nu0: float = NU0, n_samples: int = 128) -> RootReport:
    """Continue the inviscid zero of D to nu > 0 by Newton iterations."""
    from .dispersion import inviscid_root_value

    if seed is None:
        seed = inviscid_root_value(zeta)
    seed = complex(seed)
    if config.nu == 0.0:
        return RootReport([seed], [1], [0.0], [], [])
    if config.nu > nu0:
        raise ValueError(f"nu = {config.nu} above the validated range nu0 = {nu0}")

    def fun(z):
        return d_nu(zeta, z, config)

    lam, _ = _newton_complex(fun, seed)
    resid = abs(fun(np.array([lam]))[0])
    rad = certificate_radius(config.nu, seed)
    if abs(lam - seed) >= rad:
        raise CertificateError(f"root {lam} left the certificate circle of radius {rad} around {seed}")
    cnt = argument_principle_count(lambda z: d_nu(zeta, z, config), seed, rad, n_samples)
    if cnt.count != 1:
        raise CertificateError(f"argument principle count {cnt.count} != 1")
    if lam.real <= 0:
        raise CertificateError("continued root left the right half plane")
    return RootReport([lam], [1], [resid], [cnt.count], [rad])


def model_b_diffusive_root(zeta: float, config: OperatorConfig, seed: complex | None = None,
                           n_samples: int = 128) -> RootReport:
    from .dispersion import model_b_root_value

    if seed is None:
        seed = model_b_root_value(zeta)
    seed = complex(seed)
    if config.nu == 0.0:
        return RootReport([seed], [1], [0.0], [], [])

    def fun(z):
        return gamma_nu(zeta, z, config)

    lam, _ = _newton_complex(fun, seed)
    rad = certificate_radius(config.nu, seed)
    cnt = argument_principle_count(lambda z: gamma_nu(zeta, z, config), seed, rad, n_samples)
    if cnt.count != 1 or abs(lam - seed) >= rad or lam.real <= 0:
        raise CertificateError(f"model B root {lam} not certified (count {cnt.count})")
    return RootReport([lam], [1], [abs(fun(np.array([lam]))[0])], [cnt.count], [rad])


def diffusive_eigenfunction(zeta: float, lam: complex, config: OperatorConfig) -> FourierField:
    """i zeta (lambda + L)^{-1}[sin]; integrates to 1 at a zero of the dispersion function."""
    sin = FourierField(unit_rhs(config.N, "sin"))
    return 1j * zeta * resolvent_solve(lam, config, sin, check=False)


def eigen_residual(zeta: float, lam: complex, config: OperatorConfig, f: FourierField) -> float:
    """Coefficient-space max residual of (lambda + i sin - nu d^2) f - i zeta sin int f."""
    lhs = apply_operator(config, f.coeffs, lam)
    rhs = 1j * zeta * unit_rhs(config.N, "sin") * f.integral()
    return float(np.max(np.abs(lhs - rhs)))


# --------------------------------------------------------------------------
# semigroup


class Propagator:
    """Strang splitting for exp(-L t) on the 2N+1 collocation grid.

    One step: multiply nodal values by exp(-i sin dt/2), damp coefficients
    by exp(-nu m^2 dt), multiply by exp(-i sin dt/2) again.  Arrays carry
    nodal values along the last axis.
    """

    def __init__(self, config: OperatorConfig, dt: float, multiplier: np.ndarray | None = None):
        self.config = config
        self.dt = dt
        self.multiplier = np.sin(nodes(config.N)) if multiplier is None else multiplier
        self.half = np.exp(-0.5j * self.multiplier * dt)
        self.full = self.half * self.half
        m = modes(config.N)
        self.damp = np.fft.ifftshift(np.exp(-config.nu * m * m * dt))

    def diffuse(self, v):
        if self.config.nu == 0.0:
            return v
        return np.fft.ifft(np.fft.fft(v, axis=-1) * self.damp, axis=-1)

    def step(self, v):
        return self.half * self.diffuse(self.half * v)

    def run(self, v, n_steps: int):
        if n_steps == 0:
            return v
        if self.config.nu == 0.0:
            return np.exp(-1j * self.multiplier * self.dt * n_steps) * v
        v = self.half * v
        for k in range(n_steps):
            v = self.diffuse(v)
            v = (self.full if k < n_steps - 1 else self.half) * v
        return v


def _steps(t: float, dt: float) -> tuple[int, float]:
    if t == 0:
        return 0, dt
    n = max(1, int(math.ceil(t / dt - 1e-9)))
    return n, t / n


def propagate_semigroup(config: OperatorConfig, g: FourierField, t: float, dt: float = 0.01) -> FourierField:
    """exp(-L t) g by Strang splitting; dt is shrunk so that t is a whole number of steps."""
    if t < 0 or dt <= 0:
        raise ValueError("need t >= 0 and dt > 0")
    g = g.resized(config.N) if g.N != config.N else g
    n, h = _steps(t, dt)
    if n == 0:
        return g
    v = Propagator(config, h).run(to_nodes(g.coeffs), n)
    return FourierField(to_coeffs(v))


def propagator_matrix(config: OperatorConfig, t: float, dt: float) -> np.ndarray:
    """Matrix of exp(-L t) acting on coefficient vectors (columns = images of basis vectors)."""
    n, h = _steps(t, dt)
    basis = np.eye(config.size, dtype=complex)
    v = Propagator(config, h).run(to_nodes(basis), n)
    return to_coeffs(v).T


def norm_history(config: OperatorConfig, t_step: float, n_samples: int, dt: float = 0.01):
    """Operator 2-norms of exp(-L k t_step), k = 0..n_samples."""
    P = propagator_matrix(config, t_step, dt)
    Q = np.eye(config.size, dtype=complex)
    times = t_step * np.arange(n_samples + 1)
    norms = np.empty(n_samples + 1)
    norms[0] = 1.0
    for k in range(1, n_samples + 1):
        Q = P @ Q
        norms[k] = np.linalg.norm(Q, 2)
    return times, norms


def fit_log_linear(times, values, window=None) -> RateEstimate:
    t = np.asarray(times, dtype=float)
    y = np.asarray(values, dtype=float)
    if window is not None:
        sel = (t >= window[0]) & (t <= window[1])
        t, y = t[sel], y[sel]
    if t.size < 3 or np.any(y <= 0):
        raise WindowError("need >= 3 positive samples to fit a rate")
    A = np.vstack([t, np.ones_like(t)]).T
    coef, *_ = np.linalg.lstsq(A, np.log(y), rcond=None)
    resid = float(np.sqrt(np.mean((A @ coef - np.log(y)) ** 2)))
    return RateEstimate(float(-coef[0]), float(np.exp(coef[1])), (float(t[0]), float(t[-1])), resid)


def semigroup_rate(nu: float, N: int = 128, T: float | None = None, n_samples: int = 200,
                   dt: float = 0.01, upper: float = 0.3, lower: float = 1e-6) -> RateEstimate:
    """Exponential decay rate of ||exp(-L t)|| from a log-linear fit.

    The window starts once the norm has dropped below ``upper`` (past the
    initial transient) and ends at ``lower`` or at T.
    """
    config = OperatorConfig(nu, N)
    if nu == 0.0:
        T = T or 50.0
        times, norms = norm_history(config, T / n_samples, n_samples, dt)
        return fit_log_linear(times, norms)
    if T is None:
        T = 40.0 / math.sqrt(nu)
    times, norms = norm_history(config, T / n_samples, n_samples, min(dt, T / n_samples))
    if norms[-1] >= 0.1:
        raise WindowError(f"||exp(-L T)|| = {norms[-1]:.3f} >= 0.1 at T = {T}; increase T")
    start = times[np.argmax(norms < upper)]
    below = norms < lower
    stop = times[np.argmax(below)] if np.any(below) else times[-1]
    return fit_log_linear(times, norms, (start, stop))


def semigroup_norm_decay(nu_sweep, N: int = 128, T=None, n_samples: int = 200, dt: float = 0.01):
    """Per-nu decay rates and the log-log slope of rate against nu."""
    rates = [semigroup_rate(nu, N, T, n_samples, dt) for nu in nu_sweep]
    nus = np.asarray(nu_sweep, dtype=float)
    r = np.array([e.rate for e in rates])
    slope = float(np.polyfit(np.log(nus), np.log(r), 1)[0]) if len(nus) > 1 else float("nan")
    return rates, slope


def energy_defect(config: OperatorConfig, f: FourierField) -> float:
    """|Re <L f, f> - nu ||f'||^2| for the discrete operator."""
    c = f.resized(config.N).coeffs
    lc = apply_operator(config, c)
    m = modes(config.N)
    lhs = 2.0 * np.pi * np.real(np.vdot(c, lc))
    rhs = 2.0 * np.pi * config.nu * np.sum(m * m * np.abs(c) ** 2)
    return float(abs(lhs - rhs))


# --------------------------------------------------------------------------
# dense generator (independent of the dispersion functions)


def generator_matrix(zeta: float, config: OperatorConfig, model: str = "A") -> np.ndarray:
    """Matrix of f -> -L f + i zeta sin int f (model A), minus i zeta int sin f for model B."""
    n = config.size
    N = config.N
    eye = np.eye(n, dtype=complex)
    A = -_apply(config.diagonal(0.0)[:, None] * np.ones((1, n)), eye.T).T
    A[:, N] += zeta * 2.0 * np.pi * unit_rhs(N, "isin")
    if model == "B":
        # p = i pi (c_1 - c_{-1})
        row = np.zeros(n, dtype=complex)
        row[N + 1], row[N - 1] = 1j * np.pi, -1j * np.pi
        A += np.outer(-1j * zeta * unit_rhs(N, "one"), row)
    return A


def leading_eigenvalue(zeta: float, config: OperatorConfig, model: str = "A") -> complex:
    """Eigenvalue of largest real part of the discretized generator."""
    ev = np.linalg.eigvals(generator_matrix(zeta, config, model))
    return complex(ev[np.argmax(ev.real)])
