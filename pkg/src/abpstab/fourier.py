"""Truncated Fourier series on the circle.

A field is stored as coefficients c_m, m = -N..N, with
f(theta) = sum_m c_m exp(i m theta).  The matching collocation grid has
M = 2N + 1 equispaced nodes, so coefficients and nodal values are related
by an exact (invertible) DFT.
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

TAIL_TOL = 1e-8


class TruncationWarning(UserWarning):
    """Emitted when the highest retained modes are not negligible."""


def nodes(N: int) -> np.ndarray:
    M = 2 * N + 1
    return 2.0 * np.pi * np.arange(M) / M


def modes(N: int) -> np.ndarray:
    return np.arange(-N, N + 1)


def to_nodes(c: np.ndarray) -> np.ndarray:
    """Coefficients (last axis, ordered -N..N) -> nodal values."""
    M = c.shape[-1]
    return M * np.fft.ifft(np.fft.ifftshift(c, axes=-1), axis=-1)


def to_coeffs(v: np.ndarray) -> np.ndarray:
    """Nodal values on the 2N+1 grid -> coefficients ordered -N..N."""
    M = v.shape[-1]
    return np.fft.fftshift(np.fft.fft(v, axis=-1), axes=-1) / M


def integral(c: np.ndarray):
    """Integral over one period, 2 pi c_0."""
    N = (c.shape[-1] - 1) // 2
    return 2.0 * np.pi * c[..., N]


def sin_moment(c: np.ndarray):
    """Integral of sin(theta) f(theta) over one period."""
    N = (c.shape[-1] - 1) // 2
    return 1j * np.pi * (c[..., N + 1] - c[..., N - 1])


def mul_isin(c: np.ndarray) -> np.ndarray:
    """Coefficients of i sin(theta) f, truncated back to -N..N."""
    out = np.zeros_like(c)
    out[..., 1:] += 0.5 * c[..., :-1]
    out[..., :-1] -= 0.5 * c[..., 1:]
    return out


@dataclass(frozen=True)
class FourierField:
    coeffs: np.ndarray

    def __post_init__(self):
        c = np.asarray(self.coeffs, dtype=complex)
        if c.ndim != 1 or c.size % 2 == 0:
            raise ValueError("coefficient vector must be one-dimensional with odd length 2N+1")
        object.__setattr__(self, "coeffs", c)

    @property
    def N(self) -> int:
        return (self.coeffs.size - 1) // 2

    @classmethod
    def zeros(cls, N: int) -> "FourierField":
        return cls(np.zeros(2 * N + 1, dtype=complex))

    @classmethod
    def from_nodes(cls, values) -> "FourierField":
        return cls(to_coeffs(np.asarray(values, dtype=complex)))

    @classmethod
    def from_function(cls, func, N: int) -> "FourierField":
        return cls.from_nodes(func(nodes(N)))

    @classmethod
    def from_modes(cls, mode_map: dict[int, complex], N: int) -> "FourierField":
        c = np.zeros(2 * N + 1, dtype=complex)
        for m, val in mode_map.items():
            if abs(m) > N:
                raise ValueError(f"mode {m} outside truncation N={N}")
            c[m + N] = val
        return cls(c)

    def coefficient(self, m: int) -> complex:
        return complex(self.coeffs[m + self.N]) if abs(m) <= self.N else 0j

    def nodal(self) -> np.ndarray:
        return to_nodes(self.coeffs)

    def __call__(self, theta):
        theta = np.asarray(theta, dtype=float)
        m = modes(self.N)
        return np.exp(1j * np.multiply.outer(theta, m)) @ self.coeffs

    def integral(self) -> complex:
        return complex(integral(self.coeffs))

    def sin_moment(self) -> complex:
        return complex(sin_moment(self.coeffs))

    def l2_norm(self) -> float:
        return float(np.sqrt(2.0 * np.pi * np.sum(np.abs(self.coeffs) ** 2)))

    def h1_norm(self) -> float:
        m = modes(self.N)
        return float(np.sqrt(np.sum((1.0 + m * m) * np.abs(self.coeffs) ** 2)))

    def tail_ratio(self) -> float:
        peak = np.max(np.abs(self.coeffs))
        if peak == 0.0:
            return 0.0
        return float(max(abs(self.coeffs[0]), abs(self.coeffs[-1])) / peak)

    def check_tail(self, tol: float = TAIL_TOL) -> float:
        r = self.tail_ratio()
        if r >= tol:
            warnings.warn(f"truncation tail |c_N|/max|c| = {r:.2e} at N={self.N}", TruncationWarning, stacklevel=3)
        return r

    def resized(self, N: int) -> "FourierField":
        """Zero-pad or truncate to a new order."""
        out = np.zeros(2 * N + 1, dtype=complex)
        k = min(N, self.N)
        out[N - k:N + k + 1] = self.coeffs[self.N - k:self.N + k + 1]
        return FourierField(out)

    def shifted(self, alpha: float) -> "FourierField":
        """Coefficients of theta -> f(theta - alpha)."""
        return FourierField(self.coeffs * np.exp(-1j * modes(self.N) * alpha))

    def __add__(self, other: "FourierField") -> "FourierField":
        return FourierField(self.coeffs + other.coeffs)

    def __sub__(self, other: "FourierField") -> "FourierField":
        return FourierField(self.coeffs - other.coeffs)

    def __mul__(self, scalar) -> "FourierField":
        return FourierField(self.coeffs * scalar)

    __rmul__ = __mul__

    def to_csv_rows(self):
        for m, c in zip(modes(self.N), self.coeffs):
            yield int(m), float(c.real), float(c.imag)


def smooth_random_field(N: int, rng: np.random.Generator, n_modes: int = 6, decay: float = 0.6) -> FourierField:
    """Random field with a handful of geometrically decaying modes."""
    c = np.zeros(2 * N + 1, dtype=complex)
    for m in range(-n_modes, n_modes + 1):
        amp = decay ** abs(m)
        c[m + N] = amp * (rng.standard_normal() + 1j * rng.standard_normal())
    return FourierField(c)
