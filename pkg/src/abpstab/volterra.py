"""Volterra equations u + K*u = f on a uniform grid.

Convolutions use the product trapezoidal rule

    (K*u)(t_n) ~ h [ K_n u_0 / 2 + sum_{j=1}^{n-1} K_{n-j} u_j + K_0 u_n / 2 ],

and every unknown is obtained by stepping forward in n.  Kernels may be
scalar (shape (n,)) or matrix valued (shape (n, d, d)).
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field

import numpy as np

logger = logging.getLogger(__name__)


class VolterraError(RuntimeError):
    pass


class PreconditionError(ValueError):
    pass


@dataclass
class SampledKernel:
    times: np.ndarray
    values: np.ndarray
    kind: str = "volterra_scalar"
    envelope: dict | None = None

    def __post_init__(self):
        self.times = np.asarray(self.times, dtype=float)
        self.values = np.asarray(self.values, dtype=complex)
        if self.values.shape[0] != self.times.size:
            raise ValueError("kernel samples and times differ in length")
        if self.kind not in ("green", "volterra_scalar", "volterra_matrix"):
            raise ValueError(f"unknown kernel kind {self.kind!r}")
        if self.kind == "green" and np.max(np.abs(self.values.imag), initial=0.0) > 1e-10:
            raise ValueError("green kernel samples must be real")

    @property
    def step(self) -> float:
        return float(self.times[1] - self.times[0])

    @property
    def is_matrix(self) -> bool:
        return self.values.ndim == 3

    def weighted(self, gamma: float) -> "SampledKernel":
        w = np.exp(gamma * self.times)
        v = self.values * (w[:, None, None] if self.is_matrix else w)
        return SampledKernel(self.times, v, self.kind)


@dataclass
class VolterraSystem:
    kernel: SampledKernel
    forcing: np.ndarray

    def __post_init__(self):
        self.forcing = np.asarray(self.forcing, dtype=complex)
        t = self.kernel.times
        if self.forcing.shape[0] != t.size:
            raise ValueError("kernel and forcing must share the grid")
        if t.size > 1:
            h = np.diff(t)
            if t[0] != 0.0 or np.any(np.abs(h - h[0]) > 1e-9 * max(1.0, t[-1])) or h[0] <= 0:
                raise ValueError("grid must be uniform, start at 0 and increase")

    @property
    def h(self) -> float:
        return self.kernel.step


@dataclass
class ResolventKernel:
    times: np.ndarray
    values: np.ndarray
    defect: float
    right_defect: float = float("nan")
    meta: dict = field(default_factory=dict)


def _mul(a, b):
    """Product of kernel samples with values (scalar or matrix/vector)."""
    if a.ndim == 1:
        return a * b if b.ndim == 1 else a[:, None] * b if b.ndim == 2 else a[:, None, None] * b
    if b.ndim == 2:
        return np.einsum("nij,nj->ni", a, b)
    return np.einsum("nij,njk->nik", a, b)


def trapezoid_convolve(K: np.ndarray, u: np.ndarray, h: float) -> np.ndarray:
    """Product-trapezoid approximation of (K*u)(t_n) for every n."""
    K = np.asarray(K, dtype=complex)
    u = np.asarray(u, dtype=complex)
    n = K.shape[0]
    if K.ndim == 1 and u.ndim == 1:
        full = np.convolve(K, u)[:n]
    else:
        full = np.zeros((n,) + _out_shape(K, u), dtype=complex)
        for k in range(n):
            full[k] = np.sum(_mul(K[k::-1], u[:k + 1]), axis=0)
    corr = 0.5 * (_mul(K, np.broadcast_to(u[0], u.shape)) + _mul(np.broadcast_to(K[0], K.shape), u))
    out = h * (full - corr)
    out[0] = 0.0
    return out


def _out_shape(K, u):
    if K.ndim == 1:
        return u.shape[1:]
    if u.ndim == 2:
        return K.shape[1:2]
    return (K.shape[1], u.shape[2])


def _step_solve(K: np.ndarray, F: np.ndarray, h: float) -> np.ndarray:
    """March X_n + h[K_n X_0/2 + sum_{j=1}^{n-1} K_{n-j} X_j + K_0 X_n/2] = F_n."""
    n = K.shape[0]
    X = np.zeros_like(F, dtype=complex)
    X[0] = F[0]
    if K.ndim == 1:
        a = 1.0 + 0.5 * h * K[0]
        if a == 0:
            raise VolterraError("singular stepping coefficient")
        for k in range(1, n):
            s = 0.5 * K[k] * X[0] + np.dot(K[k - 1:0:-1], X[1:k])
            X[k] = (F[k] - h * s) / a
        return X
    A = np.eye(K.shape[1]) + 0.5 * h * K[0]
    if abs(np.linalg.det(A)) < 1e-14:
        raise VolterraError("singular stepping matrix")
    Ainv = np.linalg.inv(A)
    sub = "jab,jb->a" if X.ndim == 2 else "jab,jbc->ac"
    for k in range(1, n):
        s = 0.5 * K[k] @ X[0]
        if k > 1:
            s = s + np.einsum(sub, K[k - 1:0:-1], X[1:k])
        X[k] = Ainv @ (F[k] - h * s)
    return X


def resolvent_kernel(system: VolterraSystem | SampledKernel) -> ResolventKernel:
    """Resolvent R with R + K*R = K, marched with the product trapezoid rule.

    The defining identity is satisfied to rounding by construction.  The
    right identity R + R*K = K is reported as ``right_defect``; for scalar
    kernels it coincides, for matrix kernels it holds to O(h^2) unless K(0)
    commutes with every K(t).
    """
    kern = system.kernel if isinstance(system, VolterraSystem) else system
    K = kern.values
    h = kern.step
    R = _step_solve(K, K, h)
    left = R + trapezoid_convolve(K, R, h) - K
    if K.ndim == 1:
        right = R + trapezoid_convolve(R, K, h) - K
    else:
        right = R + _right_convolve(R, K, h) - K
    return ResolventKernel(kern.times, R, float(np.max(np.abs(left))), float(np.max(np.abs(right))),
                           {"h": h, "scheme": "product-trapezoid"})


def _right_convolve(R: np.ndarray, K: np.ndarray, h: float) -> np.ndarray:
    """Trapezoidal (R*K)(t_n) = int R(t-s) K(s) ds for matrix samples."""
    n = K.shape[0]
    out = np.zeros_like(R)
    for k in range(1, n):
        s = np.einsum("jab,jbc->ac", R[k::-1], K[:k + 1])
        s -= 0.5 * (R[k] @ K[0] + R[0] @ K[k])
        out[k] = h * s
    return out


def solve_volterra(system: VolterraSystem, method: str = "direct") -> np.ndarray:
    """Solve u + K*u = f.

    ``direct`` marches the discrete equation itself, so the discrete residual
    is at rounding level.  ``resolvent`` forms u = f - R*f from the resolvent
    kernel; the two agree to O(h^2) and exactly when K(0) = 0.
    """
    K, f, h = system.kernel.values, system.forcing, system.h
    if method == "direct":
        return _step_solve(K, f, h)
    if method == "resolvent":
        R = resolvent_kernel(system).values
        return f - trapezoid_convolve(R, f, h)
    raise ValueError(method)


def volterra_residual(system: VolterraSystem, u: np.ndarray) -> float:
    K, f, h = system.kernel.values, system.forcing, system.h
    return float(np.max(np.abs(u + trapezoid_convolve(K, u, h) - f)))


def fixed_point_solve(system: VolterraSystem, tol: float = 1e-13, max_iter: int = 500) -> np.ndarray:
    """Picard iteration u <- f - K*u (converges for small ||K||_L1)."""
    K, f, h = system.kernel.values, system.forcing, system.h
    u = f.copy()
    for _ in range(max_iter):
        new = f - trapezoid_convolve(K, u, h)
        if np.max(np.abs(new - u)) < tol:
            return new
        u = new
    raise VolterraError("fixed-point iteration did not converge")


# --------------------------------------------------------------------------
# Laplace transforms of sampled kernels


@dataclass
class PaleyWienerReport:
    passed: bool
    min_abs: float
    argmin: complex
    winding: int
    floor: float
    lambdas: np.ndarray
    values: np.ndarray
    tail_ratio: float


def envelope_rate(kernel: SampledKernel, fraction: float = 0.5) -> float:
    """Exponential decay rate of the kernel's envelope over the last part of the window."""
    t = kernel.times
    mag = np.abs(kernel.values).reshape(t.size, -1).max(axis=1)
    sel = t >= t[0] + (1.0 - fraction) * (t[-1] - t[0])
    tt, mm = t[sel], mag[sel]
    # block maxima over ~2 pi to skip oscillation zeros
    nb = max(3, int((tt[-1] - tt[0]) / (2.0 * np.pi)))
    edges = np.linspace(tt[0], tt[-1], nb + 1)
    xs, ys = [], []
    for a, b in zip(edges[:-1], edges[1:]):
        s = (tt >= a) & (tt <= b)
        if np.any(s) and np.max(mm[s]) > 0:
            i = np.argmax(np.where(s, mm, -1))
            xs.append(tt[i])
            ys.append(mm[i])
    if len(xs) < 2:
        return 0.0
    return float(-np.polyfit(xs, np.log(ys), 1)[0])


def sampled_laplace(kernel: SampledKernel, lams, tail: bool = True, extrapolate: bool = True) -> np.ndarray:
    """int_0^inf exp(-lambda t) K(t) dt from samples.

    Piecewise-linear interpolation of K is integrated exactly against the
    exponential (so oscillation in lambda costs no accuracy), and the part
    beyond the window is extrapolated with the fitted decay envelope.  With
    ``extrapolate`` the O(h^2) interpolation error is removed by combining
    the full grid with every second sample.
    """
    lams = np.atleast_1d(np.asarray(lams, dtype=complex))
    t = kernel.times
    K = kernel.values.reshape(t.size, -1)
    sigma = envelope_rate(kernel) if tail else 0.0
    out = _linear_laplace(t, K, lams, sigma)
    if extrapolate and t.size >= 5 and (t.size - 1) % 2 == 0:
        coarse = _linear_laplace(t[::2], K[::2], lams, sigma)
        out = (4.0 * out - coarse) / 3.0
    shape = lams.shape + kernel.values.shape[1:]
    return out.reshape(shape)


def _linear_laplace(t, K, lams, sigma):
    h = t[1] - t[0]
    out = np.empty((lams.size, K.shape[1]), dtype=complex)
    for i, lam in enumerate(lams):
        z = lam * h
        # hat-function weights of the left and right node of each interval
        if abs(z) < 1e-4:
            w_left = h * (0.5 - z / 6.0 + z * z / 24.0)
            w_right = h * (0.5 - z / 3.0 + z * z / 8.0)
        else:
            ez = np.exp(-z)
            w_left = h * (ez - 1.0 + z) / (z * z)
            w_right = h * (1.0 - ez - z * ez) / (z * z)
        e = np.exp(-lam * t[:-1])[:, None]
        total = np.sum(e * (w_left * K[:-1] + w_right * K[1:]), axis=0)
        if sigma > 0:
            total = total + np.exp(-lam * t[-1]) * K[-1] / (lam + sigma)
        out[i] = total
    return out


def paley_wiener_check(kernel: SampledKernel, lambda_grid, floor: float = 1e-3,
                       tail_tol: float = 1e-8, boundary=None) -> PaleyWienerReport:
    """Check det(I + L[K](lambda)) != 0 on a grid in the right half plane.

    ``lambda_grid`` is a 2-D array (rows along Im, columns along Re) whose
    outline is also used to count zeros enclosed by the grid through the
    winding of the determinant.
    """
    mag = np.abs(kernel.values).reshape(kernel.times.size, -1).max(axis=1)
    ratio = float(mag[-1] / max(mag.max(), 1e-300))
    if ratio > tail_tol:
        raise PreconditionError(f"kernel tail {ratio:.2e} of peak: extend the sampled window")
    lam = np.asarray(lambda_grid, dtype=complex)
    if np.any(lam.real < -1e-14):
        raise PreconditionError("lambda grid must lie in Re >= 0")
    L = sampled_laplace(kernel, lam.ravel())
    if kernel.is_matrix:
        d = kernel.values.shape[1]
        det = np.linalg.det(np.eye(d) + L.reshape(-1, d, d))
    else:
        det = 1.0 + L
    det = det.reshape(lam.shape)
    i = int(np.argmin(np.abs(det)))
    winding = 0
    if lam.ndim == 2:
        ring = np.concatenate([det[0, :], det[1:, -1], det[-1, -2::-1], det[-2:0:-1, 0], det[:1, 0]])
        winding = int(round(np.sum(np.angle(ring[1:] / ring[:-1])) / (2 * np.pi)))
    low = float(np.abs(det).ravel()[i])
    passed = bool(low > floor and winding == 0)
    return PaleyWienerReport(passed, low, complex(lam.ravel()[i]), winding, floor, lam, det, ratio)


def weighted_decay_transfer(system: VolterraSystem, gamma: float, check_strip: bool = False):
    """Solve the problem with kernel e^{gamma t} K and forcing e^{gamma t} f.

    Returns (weighted solution, max relative deviation from e^{gamma t} u).
    """
    rate = envelope_rate(system.kernel)
    if gamma > 0 and rate > 0 and gamma >= rate:
        raise PreconditionError(f"gamma = {gamma} not below the kernel decay rate {rate:.3g}")
    kern = system.kernel.weighted(gamma)
    w = np.exp(gamma * system.kernel.times)
    fw = system.forcing * (w[:, None] if system.forcing.ndim == 2 else w)
    weighted = VolterraSystem(kern, fw)
    if check_strip:
        re = np.linspace(0.0, 2.0, 21)
        im = np.linspace(-4.0, 4.0, 81)
        rep = paley_wiener_check(kern, re[None, :] + 1j * im[:, None], floor=1e-6, tail_tol=1.0)
        if not rep.passed:
            raise PreconditionError("weighted kernel fails the half-plane determinant check")
    uw = solve_volterra(weighted)
    u = solve_volterra(system)
    ref = u * (w[:, None] if u.ndim == 2 else w)
    dev = float(np.max(np.abs(uw - ref)) / max(np.max(np.abs(ref)), 1e-300))
    return uw, dev


def solve_model_b_volterra(zeta: float, config, f_in, grid, dt: float | None = None):
    """(rho, p) for model B from the 2x2 Volterra system U + zeta Kmat*U = V."""
    from .kernels import forcing_moments, model_b_kernel

    kern = model_b_kernel(config, grid, dt)
    V = forcing_moments(config, f_in, grid, dt)
    system = VolterraSystem(SampledKernel(kern.times, zeta * kern.values, "volterra_matrix"), V)
    return solve_volterra(system)


def solve_density_volterra(zeta: float, config, f_in, grid, dt: float | None = None):
    """rho from rho - zeta K_nu * rho = int exp(-L t) f_in."""
    from .kernels import forcing_moments, volterra_kernel

    kern = volterra_kernel(config, grid, dt)
    V = forcing_moments(config, f_in, grid, dt)[:, 0]
    system = VolterraSystem(SampledKernel(kern.times, -zeta * kern.values), V)
    return solve_volterra(system)


# --------------------------------------------------------------------------
# CSV exchange


def kernel_to_rows(kernel: SampledKernel):
    v = kernel.values
    for t, val in zip(kernel.times, v):
        flat = np.atleast_1d(val).ravel()
        row = [float(t)]
        for z in flat:
            row += [float(z.real), float(z.imag)]
        yield row


def kernel_from_rows(rows, kind: str = "volterra_scalar") -> SampledKernel:
    arr = np.asarray(rows, dtype=float)
    t = arr[:, 0]
    if arr.shape[1] == 2:
        return SampledKernel(t, arr[:, 1].astype(complex), kind)
    vals = arr[:, 1::2] + 1j * arr[:, 2::2]
    n = vals.shape[1]
    if n == 1:
        return SampledKernel(t, vals[:, 0], kind)
    d = int(round(math.sqrt(n)))
    if d * d != n:
        raise ValueError("matrix kernel columns must hold a square number of complex entries")
    return SampledKernel(t, vals.reshape(-1, d, d), "volterra_matrix")
