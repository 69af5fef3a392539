"""Zero counting for analytic functions on circles (argument principle)."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np


class ContourError(RuntimeError):
    """The function is (nearly) zero on the contour."""


class InconclusiveCount(RuntimeError):
    """Contour integral is too far from an integer to trust."""


@dataclass(frozen=True)
class ZeroCount:
    count: int
    integral: complex
    residual: float
    min_abs: float
    winding: int


def _evaluate(evaluator: Callable, lam: np.ndarray) -> np.ndarray:
    try:
        out = np.asarray(evaluator(lam), dtype=complex)
        if out.shape == lam.shape:
            return out
    except (TypeError, ValueError):
        pass
    return np.array([complex(evaluator(z)) for z in lam.ravel()]).reshape(lam.shape)


def argument_principle_count(evaluator: Callable, center: complex, radius: float,
                             n_samples: int = 256, min_abs: float = 1e-8) -> ZeroCount:
    """Count zeros of ``evaluator`` inside the circle |lambda - center| < radius.

    The integral (1/2 pi i) of D'/D is taken with the trapezoidal rule in the
    angle, and D' by central differences.  The phase winding of D along the
    same samples is reported as an independent count.
    """
    phi = 2.0 * np.pi * np.arange(n_samples) / n_samples
    lam = center + radius * np.exp(1j * phi)
    h = 1e-6 * np.maximum(1.0, np.abs(lam))
    vals = _evaluate(evaluator, lam)
    low = float(np.min(np.abs(vals)))
    if not np.isfinite(low) or low < min_abs:
        raise ContourError(f"|D| = {low:.3e} on contour (center {center}, radius {radius})")
    dvals = (_evaluate(evaluator, lam + h) - _evaluate(evaluator, lam - h)) / (2.0 * h)
    dlam = 1j * radius * np.exp(1j * phi) * (2.0 * np.pi / n_samples)
    total = np.sum(dvals / vals * dlam) / (2j * np.pi)
    count = int(round(total.real))
    residual = float(abs(total - count))
    ang = np.unwrap(np.angle(np.append(vals, vals[0])))
    winding = int(round((ang[-1] - ang[0]) / (2.0 * np.pi)))
    if residual > 0.05:
        raise InconclusiveCount(f"contour integral {total:.4f} not near an integer")
    return ZeroCount(count, complex(total), residual, low, winding)
