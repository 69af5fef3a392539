"""Integer-order Bessel functions of the first kind, J_n(t).

Used as an independent oracle for the free-transport density and the
inviscid Volterra kernel.  Small arguments use the power series; larger
ones use Miller's backward recurrence normalised by the identity
J_0 + 2 * sum_k J_2k = 1.  Nothing here touches the solver code paths.
"""
from __future__ import annotations

import math

import numpy as np

SERIES_CUTOFF = 12.0


def _series(n: int, t: float) -> float:
    half = 0.5 * t
    term = half**n / math.factorial(n)
    total = term
    q = -half * half
    k = 0
    while True:
        k += 1
        term *= q / (k * (k + n))
        total += term
        if abs(term) < 1e-17 * max(abs(total), 1e-300) and k > 4:
            break
        if k > 200:
            break
    return total


def _miller(n: int, t: float) -> float:
    # start well above both n and t so the minimal solution dominates
    top = 2 * ((max(n, int(t)) + 30 + int(2 * math.sqrt(t))) // 2)
    j_next, j_cur = 0.0, 1e-30
    norm = 0.0
    want = 0.0
    for k in range(top, 0, -1):
        j_prev = (2.0 * k / t) * j_cur - j_next
        j_next, j_cur = j_cur, j_prev
        # j_cur now holds the unnormalised J_{k-1}
        if k - 1 == n:
            want = j_cur
        if (k - 1) % 2 == 0 and k - 1 > 0:
            norm += 2.0 * j_cur
        if abs(j_cur) > 1e250:
            j_cur *= 1e-250
            j_next *= 1e-250
            norm *= 1e-250
            want *= 1e-250
    norm += j_cur
    return want / norm


def _jn_scalar(n: int, t: float) -> float:
    sign = 1.0
    if n < 0:
        n = -n
        sign = -1.0 if n % 2 else 1.0
    if t < 0:
        t = -t
        if n % 2:
            sign = -sign
    if t == 0.0:
        return sign * (1.0 if n == 0 else 0.0)
    if t <= SERIES_CUTOFF:
        return sign * _series(n, t)
    return sign * _miller(n, t)


def jn(n: int, t):
    """J_n(t) for integer n and real t (scalar or array)."""
    arr = np.asarray(t, dtype=float)
    out = np.array([_jn_scalar(int(n), float(x)) for x in arr.ravel()])
    out = out.reshape(arr.shape)
    return float(out) if out.ndim == 0 else out


def j0(t):
    return jn(0, t)


def j1(t):
    return jn(1, t)
