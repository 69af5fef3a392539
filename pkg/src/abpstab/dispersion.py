"""Inviscid dispersion relations, their zeros and the bounded-operator resolvent.

Model A:
    D(lambda) = 1 - i zeta * int_0^{2pi} sin t / (lambda + i sin t) dt
              = 1 - 2 pi zeta + 2 pi zeta / s,     s = sqrt(1 + 1/lambda^2)
Model B:
    Gamma(lambda) = det(I + zeta A_lambda) = 1 - 4 pi^2 zeta^2 (1 - 1/s)

Both are analytic off the segment i[-1, 1].  The square root is the
principal branch, which has positive real part there.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np
from numpy.polynomial.legendre import leggauss
from scipy import integrate

from .contour import argument_principle_count
from .fourier import FourierField, nodes, to_coeffs

CUT_TOL = 1e-13
NEAR_CUT = 0.05
ZETA_CRITICAL = 1.0 / (2.0 * math.pi)
MARGINAL_ZETA_TOL = 1e-12
CERT_RADIUS = 0.1

# swapped out by the branch sabotage test
_sqrt = np.sqrt


class CutError(ValueError):
    """Evaluation point on (or numerically at) the segment i[-1, 1]."""


class BranchError(ArithmeticError):
    """The square root returned a value with nonpositive real part."""


class SpectrumError(ValueError):
    """Point too close to the spectrum for a resolvent evaluation."""


class MarginalParameterError(ValueError):
    """zeta sits on the threshold 1/(2 pi)."""


class NearCutWarning(UserWarning):
    pass


@dataclass(frozen=True)
class DispersionValue:
    value: complex
    method: str
    quadrature_nodes: int | None = None
    converged: bool | None = None


@dataclass(frozen=True)
class RootReport:
    roots: list
    multiplicities: list
    residuals: list = field(default_factory=list)
    counts: list = field(default_factory=list)
    radii: list = field(default_factory=list)


def cut_distance(lam):
    """Distance from lambda to the segment i[-1, 1]."""
    lam = np.asarray(lam, dtype=complex)
    over = np.maximum(np.abs(lam.imag) - 1.0, 0.0)
    return np.hypot(lam.real, over)


def _check_cut(lam, tol: float = CUT_TOL):
    d = cut_distance(lam)
    if np.any(d <= tol):
        raise CutError("lambda on the cut i[-1, 1]")
    if np.any(d < NEAR_CUT):
        warnings.warn("lambda within 0.05 of the cut i[-1,1]", NearCutWarning, stacklevel=3)


def branch_root(lam):
    """sqrt(1 + 1/lambda^2) on the principal branch, with the branch asserted."""
    lam = np.asarray(lam, dtype=complex)
    s = _sqrt(1.0 + 1.0 / (lam * lam))
    if np.any(np.asarray(s).real <= 0.0):
        raise BranchError("Re sqrt(1 + 1/lambda^2) <= 0")
    return s


def _scalar(x):
    x = np.asarray(x)
    return complex(x) if x.ndim == 0 else x


def d_closed(zeta, lam):
    """Vectorised closed form of D."""
    _check_cut(lam)
    s = branch_root(lam)
    return _scalar((1.0 - 2.0 * np.pi * zeta) + 2.0 * np.pi * zeta / s)


def d_closed_derivative(zeta, lam):
    lam = np.asarray(lam, dtype=complex)
    s = branch_root(lam)
    # ds/dlambda = -1/(lambda^3 s)
    return _scalar(2.0 * np.pi * zeta / (s ** 3 * lam ** 3))


def d_quadrature(zeta, lam, n_nodes: int = 512):
    """Vectorised trapezoidal evaluation of the defining integral."""
    if n_nodes < 16:
        raise ValueError("need at least 16 quadrature nodes")
    _check_cut(lam)
    lam = np.asarray(lam, dtype=complex)
    th = 2.0 * np.pi * np.arange(n_nodes) / n_nodes
    sn = np.sin(th)
    integ = np.sum(sn / (lam[..., None] + 1j * sn), axis=-1) * (2.0 * np.pi / n_nodes)
    return _scalar(1.0 - 1j * zeta * integ)


def dispersion_closed_form(zeta: float, lam: complex) -> DispersionValue:
    return DispersionValue(complex(d_closed(zeta, lam)), "closed_form")


def dispersion_quadrature(zeta: float, lam: complex, n_nodes: int = 512) -> DispersionValue:
    v = complex(d_quadrature(zeta, lam, n_nodes))
    v2 = complex(d_quadrature(zeta, lam, 2 * n_nodes))
    return DispersionValue(v, "quadrature", n_nodes, abs(v2 - v) <= 1e-9)


def inviscid_root_value(zeta: float) -> float:
    """Positive real zero of D for zeta > 1/(2 pi)."""
    return (2.0 * np.pi * zeta - 1.0) / math.sqrt(4.0 * np.pi * zeta - 1.0)


def _newton_real(fun, dfun, x, iters: int = 20):
    for _ in range(iters):
        step = fun(x) / dfun(x)
        x = x - step
        if abs(step) < 1e-15 * max(1.0, abs(x)):
            break
    return x


def inviscid_roots(zeta: float, n_nodes: int = 512, certify: bool = True) -> RootReport:
    """Zeros of D for a given zeta.

    Below the threshold there are none.  Above it there is a symmetric real
    pair; the explicit value is polished by Newton iterations on the
    trapezoidal evaluation and certified by an argument-principle count.
    """
    if abs(zeta - ZETA_CRITICAL) <= MARGINAL_ZETA_TOL:
        raise MarginalParameterError("zeta = 1/(2 pi): the zeros collide with the cut at 0")
    if zeta < ZETA_CRITICAL:
        return RootReport([], [])
    x0 = inviscid_root_value(zeta)
    # trapezoid error decays like exp(-n asinh(lambda)); keep n * lambda large
    n_nodes = int(min(max(n_nodes, 64.0 / x0), 2 ** 22))
    th = 2.0 * np.pi * np.arange(n_nodes) / n_nodes
    sn = np.sin(th)
    w = 2.0 * np.pi / n_nodes

    def fq(x):
        return 1.0 - 1j * zeta * np.sum(sn / (x + 1j * sn)) * w

    def dfq(x):
        return 1j * zeta * np.sum(sn / (x + 1j * sn) ** 2) * w

    x = _newton_real(fq, dfq, complex(x0)).real
    roots = [x, -x]
    residuals, counts, radii = [], [], []
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", NearCutWarning)
        for r in roots:
            residuals.append(max(abs(complex(d_closed(zeta, r))), abs(fq(r))))
            if certify:
                rad = min(CERT_RADIUS, 0.5 * abs(r))
                zc = argument_principle_count(lambda z: d_closed(zeta, z), r, rad)
                counts.append(zc.count)
                radii.append(rad)
    return RootReport(roots, [1, 1], residuals, counts, radii)


def unstable_root_exists(zeta: float, model: str = "A", lam_min: float = 1e-12, lam_max: float = 1e4,
                         n: int = 4000) -> bool:
    """Sign-change search for a positive real zero of D (model A) or Gamma (model B)."""
    lam = np.logspace(math.log10(lam_min), math.log10(lam_max), n)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", NearCutWarning)
        vals = np.real(d_closed(zeta, lam) if model == "A" else gamma_closed(zeta, lam))
    return bool(np.any(np.sign(vals[:-1]) != np.sign(vals[1:])) or np.any(vals == 0.0))


# --------------------------------------------------------------------------
# resolvent of A f = -i sin f + i zeta sin int f


def resolvent_apply(zeta: float, lam: complex, H, check: bool = True):
    """Apply (lambda - A_zeta)^{-1} to H.

    H may be a FourierField or nodal values on the 2N+1 grid; the result has
    the same representation.  Division by lambda + i sin(theta) is exact at
    the nodes and the rank-one correction uses the same trapezoidal rule,
    so the discrete residual is at rounding level.
    """
    _check_cut(lam)
    as_field = isinstance(H, FourierField)
    h = H.nodal() if as_field else np.asarray(H, dtype=complex)
    M = h.shape[-1]
    th = 2.0 * np.pi * np.arange(M) / M
    sn = np.sin(th)
    den = lam + 1j * sn
    w = 2.0 * np.pi / M
    dval = 1.0 - 1j * zeta * np.sum(sn / den) * w
    if abs(dval) < 1e-12:
        raise SpectrumError(f"D({lam}) = {dval:.2e}: lambda is (numerically) an eigenvalue")
    avg = np.sum(h / den) * w
    f = h / den + zeta * (avg / dval) * 1j * sn / den
    if check:
        res = resolvent_residual(zeta, lam, h, f)
        scale = max(1.0, np.sqrt(np.sum(np.abs(h) ** 2) * w))
        if res > 1e-9 * scale:
            raise SpectrumError(f"resolvent residual {res:.2e} too large")
    return FourierField(to_coeffs(f)) if as_field else f


def resolvent_residual(zeta: float, lam: complex, h, f) -> float:
    """L2 norm of (lambda - A_zeta) f - h on the nodal grid."""
    h = h.nodal() if isinstance(h, FourierField) else np.asarray(h, dtype=complex)
    f = f.nodal() if isinstance(f, FourierField) else np.asarray(f, dtype=complex)
    M = h.shape[-1]
    sn = np.sin(2.0 * np.pi * np.arange(M) / M)
    w = 2.0 * np.pi / M
    r = (lam + 1j * sn) * f - 1j * zeta * sn * np.sum(f) * w - h
    return float(np.sqrt(np.sum(np.abs(r) ** 2) * w))


# --------------------------------------------------------------------------
# approximate eigenfunctions on the continuous spectrum


def _bump(x, power: int = 6):
    return np.where(np.abs(x) < 0.5, (1.0 - 4.0 * x * x) ** power, 0.0)


def weyl_residual(zeta: float, sigma: float, n: int, power: int = 6, order: int = 96) -> float:
    """||(i sigma - A_zeta) psi_n|| for a concentrating bump centred where sin = -sigma.

    psi_n(theta) = sqrt(n) psi(n (theta - theta0)) with psi a polynomial bump
    supported in (-1/2, 1/2), normalised to unit L2 norm.  The norm is
    computed exactly up to Gauss-Legendre accuracy in the scaled variable.
    """
    if abs(sigma) > 1.0:
        raise ValueError("sigma must lie in [-1, 1]")
    if n < 4:
        raise ValueError("n must be at least 4")
    x, wx = leggauss(order)
    x, wx = 0.5 * x, 0.5 * wx
    norm = math.sqrt(np.sum(wx * _bump(x, power) ** 2))
    psi = _bump(x, power) / norm
    theta0 = -math.asin(sigma)
    theta = theta0 + x / n
    amp = math.sqrt(n) * psi
    a = sigma + np.sin(theta)
    mass = np.sum(wx * amp) / n
    # r = i a psi_n - i zeta sin(theta) mass
    local = np.sum(wx * (a * amp) ** 2) / n
    cross = np.sum(wx * a * amp * np.sin(theta)) / n
    val = local - 2.0 * zeta * mass * cross + zeta * zeta * mass * mass * math.pi
    return math.sqrt(max(val, 0.0))


# --------------------------------------------------------------------------
# model B


def model_b_coefficients(lam):
    """Closed forms (I, J, K) of the three moment integrals.

    I = i int sin/(lam + i sin), J = i int 1/(lam + i sin), K = i int sin^2/(lam + i sin)
    """
    _check_cut(lam)
    lam = np.asarray(lam, dtype=complex)
    if np.any(lam == 0):
        raise CutError("lambda = 0 excluded")
    s = branch_root(lam)
    I = 2.0 * np.pi * (s - 1.0) / s
    J = 2j * np.pi / (lam * s)
    K = 2j * np.pi * lam * (1.0 - 1.0 / s)
    return _scalar(I), _scalar(J), _scalar(K)


def model_b_coefficients_quadrature(lam, n_nodes: int = 512):
    _check_cut(lam)
    lam = np.asarray(lam, dtype=complex)
    th = 2.0 * np.pi * np.arange(n_nodes) / n_nodes
    sn = np.sin(th)
    w = 2.0 * np.pi / n_nodes
    den = lam[..., None] + 1j * sn
    I = 1j * np.sum(sn / den, axis=-1) * w
    J = 1j * np.sum(1.0 / den, axis=-1) * w
    K = 1j * np.sum(sn * sn / den, axis=-1) * w
    return _scalar(I), _scalar(J), _scalar(K)


def model_b_matrix(zeta, lam, coefficients=None):
    I, J, K = coefficients if coefficients is not None else model_b_coefficients(lam)
    I, J, K = (np.asarray(v, dtype=complex) for v in (I, J, K))
    A = np.stack([np.stack([-I, J], -1), np.stack([-K, I], -1)], -2)
    return np.eye(2) + zeta * A


def gamma_closed(zeta, lam):
    _check_cut(lam)
    s = branch_root(lam)
    return _scalar(1.0 - 4.0 * np.pi ** 2 * zeta ** 2 * (1.0 - 1.0 / s))


def model_b_gamma(zeta: float, lam: complex, method: str = "closed_form", n_nodes: int = 512) -> DispersionValue:
    if method == "closed_form":
        return DispersionValue(complex(gamma_closed(zeta, lam)), "closed_form")
    if method == "quadrature":
        mat = model_b_matrix(zeta, lam, model_b_coefficients_quadrature(lam, n_nodes))
        return DispersionValue(complex(np.linalg.det(mat)), "quadrature", n_nodes)
    raise ValueError(f"unknown method {method!r}")


def model_b_root_value(zeta: float) -> float:
    """Positive real zero of Gamma for zeta > 1/(2 pi)."""
    a = 1.0 - 1.0 / (4.0 * np.pi ** 2 * zeta ** 2)
    return a / math.sqrt(1.0 - a * a)


def model_b_roots(zeta: float, certify: bool = True) -> RootReport:
    if abs(zeta - ZETA_CRITICAL) <= MARGINAL_ZETA_TOL:
        raise MarginalParameterError("zeta = 1/(2 pi)")
    if zeta < ZETA_CRITICAL:
        return RootReport([], [])
    x0 = model_b_root_value(zeta)
    n_nodes = int(min(max(512, 64.0 / x0), 2 ** 22))

    def g(x):
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", NearCutWarning)
            return complex(model_b_gamma(zeta, x, "quadrature", n_nodes).value)

    def dg(x):
        h = 1e-6 * max(1.0, abs(x))
        return (g(x + h) - g(x - h)) / (2 * h)

    x = _newton_real(g, dg, complex(x0), iters=8).real
    roots = [x, -x]
    residuals, counts, radii = [], [], []
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", NearCutWarning)
        for r in roots:
            residuals.append(abs(complex(gamma_closed(zeta, r))))
            if certify:
                rad = min(CERT_RADIUS, 0.5 * abs(r))
                counts.append(argument_principle_count(lambda z: gamma_closed(zeta, z), r, rad).count)
                radii.append(rad)
    return RootReport(roots, [1, 1], residuals, counts, radii)


def model_b_eigenvector(zeta: float, lam: complex):
    """Kernel vector (rho, p) of I + zeta A_lambda, normalised with rho = 1 when possible."""
    mat = model_b_matrix(zeta, lam)
    _, _, vh = np.linalg.svd(mat)
    vec = vh[-1].conj()
    if abs(vec[0]) > 1e-14:
        vec = vec / vec[0]
    return vec


def model_b_eigenfunction(zeta: float, lam: complex, N: int) -> FourierField:
    rho, p = model_b_eigenvector(zeta, lam)
    th = nodes(N)
    sn = np.sin(th)
    den = lam + 1j * sn
    vals = 1j * zeta * sn * rho / den - 1j * zeta * p / den
    return FourierField(to_coeffs(vals))


def model_a_eigenfunction(zeta: float, lam: complex, N: int) -> FourierField:
    """Profile i zeta sin/(lambda + i sin); it integrates to 1 when D(lambda) = 0."""
    sn = np.sin(nodes(N))
    return FourierField(to_coeffs(1j * zeta * sn / (lam + 1j * sn)))


# --------------------------------------------------------------------------
# rational integral over the real line


def _excluded_ray(z: complex, tol: float = 0.0) -> bool:
    return abs(z.imag) <= tol and abs(z.real) >= 1.0 - tol


def rational_integral_oracle(z: complex) -> complex:
    """int_R dt / (t^2 + 2 z t + 1) = pi / sqrt(1 - z^2)."""
    z = complex(z)
    if _excluded_ray(z):
        raise ValueError("z on (-inf,-1] U [1,inf): the integrand has a real pole")
    return complex(np.pi / np.sqrt(1.0 - z * z))


def rational_integral_quadrature(z: complex, half_width: float = 1e4) -> complex:
    """Adaptive quadrature on [-L, L] plus the asymptotic tail contribution."""
    z = complex(z)
    if _excluded_ray(z):
        raise ValueError("z on (-inf,-1] U [1,inf)")
    L = half_width

    def f(t):
        return 1.0 / (t * t + 2.0 * z * t + 1.0)

    # refine around both poles -z +- sqrt(z^2 - 1); their distance to the axis sets the scale
    pts = set()
    for pole in np.roots([1.0, 2.0 * z, 1.0]):
        c, wid = pole.real, max(abs(pole.imag), 1e-6)
        pts |= {c - 5 * wid, c - wid, c, c + wid, c + 5 * wid}
    pts = sorted(p for p in pts if -L < p < L)
    kw = dict(points=pts, limit=2000, epsabs=1e-13, epsrel=1e-13)
    re = integrate.quad(lambda t: f(t).real, -L, L, **kw)[0]
    im = integrate.quad(lambda t: f(t).imag, -L, L, **kw)[0]
    # 1/(t^2+2zt+1) = t^-2 - 2z t^-3 + (4z^2-1) t^-4 - ...; odd powers cancel
    tail = 2.0 / L + 2.0 * (4.0 * z * z - 1.0) / (3.0 * L ** 3)
    return complex(re, im) + tail
