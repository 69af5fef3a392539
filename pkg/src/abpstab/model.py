"""Velocity laws, homogeneous states and the per-mode reduction.

The linearised problem around a homogeneous state of volume fraction phi
collapses, for each nonzero wavevector k, to an angular equation that
depends on a single coupling constant

    zeta = -phi v'(phi) / (2 pi v(phi))

and a rescaled rotational diffusion nu / (v(phi) |k|).  Instability of the
inviscid problem happens exactly when zeta > 1/(2 pi), i.e. when the flux
rho v(rho) has negative slope at rho = phi.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Callable, Mapping, Sequence

import numpy as np
from scipy.interpolate import CubicSpline

MARGINAL_TOL = 1e-12
VALIDATION_GRID = 1024
ZETA_CRITICAL = 1.0 / (2.0 * math.pi)


class ValidationError(ValueError):
    """Raised when a velocity law or state violates its invariants."""


class StabilityClass(enum.Enum):
    STABLE = "stable"
    UNSTABLE = "unstable"
    MARGINAL = "marginal"


@dataclass(frozen=True)
class Classification:
    label: StabilityClass
    flux_derivative: float


@dataclass(frozen=True)
class VelocityLaw:
    """Density-dependent swim speed v(rho) on [0, 1]."""

    kind: str
    params: Mapping[str, object]
    _v: Callable = field(repr=False, compare=False)
    _dv: Callable = field(repr=False, compare=False)

    def v(self, rho):
        return self._v(rho)

    def dv(self, rho):
        return self._dv(rho)


def _validate(law: VelocityLaw) -> VelocityLaw:
    rho = np.linspace(0.0, 1.0, VALIDATION_GRID + 2)[1:-1]
    vals = np.asarray(law.v(rho), dtype=float)
    if not np.all(np.isfinite(vals)):
        raise ValidationError("velocity law is not finite on (0,1)")
    if np.any(vals <= 0.0) or np.any(vals >= 1.0):
        raise ValidationError("velocity law must map (0,1) into (0,1)")
    # finite-difference slope on the grid plus the analytic derivative
    fd = np.diff(vals) / np.diff(rho)
    if np.any(fd >= 0.0):
        raise ValidationError("velocity law must be strictly decreasing")
    if np.any(np.asarray(law.dv(rho)) >= 0.0):
        raise ValidationError("velocity law derivative must be negative on (0,1)")
    return law


def make_velocity_law(kind: str = "affine", params: Mapping[str, object] | None = None) -> VelocityLaw:
    """Build and validate a velocity law.

    Parameters
    ----------
    kind : {"affine", "tabulated"}
        ``affine`` takes ``intercept`` and ``slope`` (default 1 and -1, i.e.
        v = 1 - rho).  ``tabulated`` takes ``rho`` and ``v`` sample arrays and
        interpolates them with a cubic spline.
    params : mapping, optional

    Returns
    -------
    VelocityLaw
    """
    params = dict(params or {})
    if kind == "affine":
        a = float(params.get("intercept", 1.0))
        b = float(params.get("slope", -1.0))
        def _v(r):
            return a + b * np.asarray(r, dtype=float) if np.ndim(r) else a + b * float(r)

        def _dv(r):
            return np.full(np.shape(r), b) if np.ndim(r) else b

        return _validate(VelocityLaw("affine", {"intercept": a, "slope": b}, _v, _dv))
    if kind == "tabulated":
        rho = np.asarray(params["rho"], dtype=float)
        v = np.asarray(params["v"], dtype=float)
        if rho.ndim != 1 or rho.shape != v.shape or rho.size < 4:
            raise ValidationError("tabulated law needs matching rho/v arrays with >= 4 samples")
        order = np.argsort(rho)
        rho, v = rho[order], v[order]
        if rho[0] > 0.0 or rho[-1] < 1.0:
            raise ValidationError("tabulated law must cover [0, 1]")
        spline = CubicSpline(rho, v)
        deriv = spline.derivative()

        def _v(r):
            out = spline(r)
            return float(out) if np.ndim(r) == 0 else out

        def _dv(r):
            out = deriv(r)
            return float(out) if np.ndim(r) == 0 else out

        law = VelocityLaw("tabulated", {"rho": rho.tolist(), "v": v.tolist()}, _v, _dv)
        return _validate(law)
    raise ValidationError(f"unknown velocity law kind {kind!r}")


def law_from_config(section: Mapping[str, str]) -> VelocityLaw:
    """Read a velocity law from a key-value section.

    Recognised keys: ``kind``; ``intercept``, ``slope`` for affine laws;
    ``table`` (``rho v`` pairs separated by ``;`` or newlines) or
    ``table_file`` (two whitespace-separated columns) for tabulated ones.
    """
    kind = section.get("kind", "affine").strip()
    if kind == "affine":
        return make_velocity_law(
            "affine",
            {"intercept": float(section.get("intercept", 1.0)), "slope": float(section.get("slope", -1.0))},
        )
    if kind == "tabulated":
        if "table_file" in section:
            data = np.loadtxt(section["table_file"].strip(), ndmin=2)
        else:
            rows = [r.split() for r in section["table"].replace(";", "\n").splitlines() if r.strip()]
            data = np.array(rows, dtype=float)
        return make_velocity_law("tabulated", {"rho": data[:, 0], "v": data[:, 1]})
    raise ValidationError(f"unknown velocity law kind {kind!r}")


@dataclass(frozen=True)
class HomogeneousState:
    phi: float
    law: VelocityLaw

    def __post_init__(self):
        if not 0.0 < self.phi < 1.0:
            raise ValidationError(f"volume fraction must lie in (0,1), got {self.phi}")


@dataclass(frozen=True)
class ModeSource:
    k: tuple[int, int]
    nu_physical: float
    time_scale: float
    kappa: float | None = None


@dataclass(frozen=True)
class ReducedParams:
    zeta: float
    nu: float = 0.0
    source_mode: ModeSource | None = None

    def __post_init__(self):
        if not self.zeta > 0.0:
            raise ValidationError("zeta must be positive")
        if not self.nu >= 0.0:
            raise ValidationError("nu must be nonnegative")


def affine_state(phi: float) -> HomogeneousState:
    return HomogeneousState(phi, make_velocity_law("affine"))


def zeta_of(state: HomogeneousState) -> float:
    v = float(state.law.v(state.phi))
    if v == 0.0:
        raise ZeroDivisionError("v(phi) = 0")
    return -state.phi * float(state.law.dv(state.phi)) / (2.0 * math.pi * v)


def flux_derivative(state: HomogeneousState) -> float:
    return float(state.law.v(state.phi)) + state.phi * float(state.law.dv(state.phi))


def classify_state(state: HomogeneousState, tol: float = MARGINAL_TOL) -> Classification:
    fp = flux_derivative(state)
    if abs(fp) <= tol:
        label = StabilityClass.MARGINAL
    elif fp > 0:
        label = StabilityClass.STABLE
    else:
        label = StabilityClass.UNSTABLE
    return Classification(label, fp)


def _norm_k(k: Sequence[int]) -> float:
    k = tuple(int(x) for x in k)
    if len(k) != 2:
        raise ValueError("wavevector must have two integer components")
    if k == (0, 0):
        raise ValueError("the k = 0 mode carries no coupling; reduction needs k != 0")
    return math.hypot(*k)


def reduce_mode(state: HomogeneousState, k: Sequence[int], nu_physical: float = 0.0,
                kappa: float | None = None) -> ReducedParams:
    """Rescale the mode-k equation to the reduced angular problem."""
    kn = _norm_k(k)
    scale = float(state.law.v(state.phi)) * kn
    return ReducedParams(
        zeta=zeta_of(state),
        nu=nu_physical / scale,
        source_mode=ModeSource(tuple(int(x) for x in k), nu_physical, scale, kappa),
    )


def lift_growth_rate(lambda_reduced: complex, state: HomogeneousState, k: Sequence[int],
                     kappa: float = 0.0) -> complex:
    """Map a reduced growth rate back to physical time, including spatial diffusion."""
    kn = _norm_k(k)
    return float(state.law.v(state.phi)) * kn * lambda_reduced - kappa * kn * kn
