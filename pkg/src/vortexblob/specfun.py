"""Modified Bessel functions of the second kind, orders zero and one.

Two regimes are used:

* ``0 < x <= 2``: the ascending series around the origin, summed until the
  terms drop below double precision.
* ``x > 2``: Chebyshev expansions of ``sqrt(x) e^x K_nu(x)`` in the variable
  ``u = 4/x - 1``.  The coefficients are generated at import time from
  Steed's continued fraction (Temme's CF2), which converges to full
  precision for ``x >= 2`` but is too slow to be the evaluation path itself.

Past ``x = 705`` the unscaled values would be subnormal; they are returned as
exact zeros.  The scaled variants remain finite everywhere.

The scalar ``njit`` kernels (``k0k1``, ``k1_complement`` ...) are meant to be
called from other compiled loops; the public wrappers accept floats or arrays.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numba
import numpy as np

EULER_GAMMA = 0.57721566490153286061
UNDERFLOW_X = 705.0
SERIES_SPLIT = 2.0
_CHEB_DEGREE = 24


@numba.njit(cache=True)
def _continued_fraction_scaled(x):
    """(e^x K0(x), e^x K1(x)) by Steed's algorithm, valid for x >= 2."""
    b = 2.0 * (1.0 + x)
    d = 1.0 / b
    h = d
    delh = d
    q1 = 0.0
    q2 = 1.0
    a1 = 0.25
    q = a1
    c = a1
    a = -a1
    s = 1.0 + q * delh
    for i in range(2, 1000):
        a -= 2.0 * (i - 1)
        c = -a * c / i
        qnew = (q1 - b * q2) / a
        q1 = q2
        q2 = qnew
        q += c * qnew
        b += 2.0
        d = 1.0 / (b + a * d)
        delh = (b * d - 1.0) * delh
        h += delh
        dels = q * delh
        s += dels
        if abs(dels) < 1e-17 * abs(s):
            break
    h = a1 * h
    k0s = math.sqrt(math.pi / (2.0 * x)) / s
    k1s = k0s * (x + 0.5 - h) / x
    return k0s, k1s


def _chebyshev_coefficients():
    n = _CHEB_DEGREE + 1
    u = np.cos(np.pi * (np.arange(n) + 0.5) / n)
    x = 4.0 / (u + 1.0)
    vals = np.array([_continued_fraction_scaled(xi) for xi in x])
    rt = np.sqrt(x)
    c0 = np.polynomial.chebyshev.chebfit(u, vals[:, 0] * rt, _CHEB_DEGREE)
    c1 = np.polynomial.chebyshev.chebfit(u, vals[:, 1] * rt, _CHEB_DEGREE)
    return c0.astype(np.float64), c1.astype(np.float64)


_C0, _C1 = _chebyshev_coefficients()


@numba.njit(cache=True)
def _clenshaw(coef, u):
    b1 = 0.0
    b2 = 0.0
    u2 = 2.0 * u
    for k in range(coef.shape[0] - 1, 0, -1):
        b1, b2 = u2 * b1 - b2 + coef[k], b1
    return u * b1 - b2 + coef[0]


@numba.njit(cache=True)
def _series(x):
    """Ascending series: returns (K0(x), K1(x), I0(x) - 1, 1/x - K1(x))."""
    y = 0.25 * x * x
    lg = math.log(0.5 * x)
    term0 = 1.0  # y^k / (k!)^2
    term1 = 1.0  # y^k / (k! (k+1)!)
    hk = 0.0  # harmonic number H_k
    i0m1 = 0.0
    s0 = 0.0
    i1s = 1.0
    s1 = 1.0 - 2.0 * EULER_GAMMA  # psi(1) + psi(2)
    for k in range(1, 60):
        term0 *= y / (k * k)
        term1 *= y / (k * (k + 1))
        hk += 1.0 / k
        i0m1 += term0
        s0 += hk * term0
        i1s += term1
        s1 += (2.0 * hk + 1.0 / (k + 1) - 2.0 * EULER_GAMMA) * term1
        if term0 < 1e-18 * (1.0 + i0m1):
            break
    k0 = -(lg + EULER_GAMMA) * (1.0 + i0m1) + s0
    i1 = 0.5 * x * i1s
    # 1/x - K1 without the cancellation of the leading 1/x
    comp = -lg * i1 + 0.25 * x * s1
    k1 = 1.0 / x - comp
    return k0, k1, i0m1, comp


@numba.njit(cache=True)
def k0k1_scaled(x):
    """(e^x K0(x), e^x K1(x)) for x > 0."""
    if x <= SERIES_SPLIT:
        k0, k1, _, _ = _series(x)
        e = math.exp(x)
        return k0 * e, k1 * e
    u = 4.0 / x - 1.0
    r = 1.0 / math.sqrt(x)
    return _clenshaw(_C0, u) * r, _clenshaw(_C1, u) * r


@numba.njit(cache=True)
def k0k1(x):
    """(K0(x), K1(x)) for x > 0, exact zeros past the underflow threshold."""
    if x <= SERIES_SPLIT:
        k0, k1, _, _ = _series(x)
        return k0, k1
    if x > UNDERFLOW_X:
        return 0.0, 0.0
    e = math.exp(-x)
    u = 4.0 / x - 1.0
    r = e / math.sqrt(x)
    return _clenshaw(_C0, u) * r, _clenshaw(_C1, u) * r


@numba.njit(cache=True)
def k1_scalar(x):
    if x <= SERIES_SPLIT:
        return _series(x)[1]
    if x > UNDERFLOW_X:
        return 0.0
    return _clenshaw(_C1, 4.0 / x - 1.0) * math.exp(-x) / math.sqrt(x)


@numba.njit(cache=True)
def k1_complement(z):
    """1/z - K1(z) for z > 0, accurate also as z -> 0."""
    if z <= SERIES_SPLIT:
        return _series(z)[3]
    return 1.0 / z - k1_scalar(z)


@numba.njit(cache=True)
def k0_plus_log(z):
    """K0(z) + ln z for z > 0; tends to ln 2 - gamma as z -> 0."""
    if z <= SERIES_SPLIT:
        y = 0.25 * z * z
        term = 1.0
        hk = 0.0
        i0m1 = 0.0
        s0 = 0.0
        for k in range(1, 60):
            term *= y / (k * k)
            hk += 1.0 / k
            i0m1 += term
            s0 += hk * term
            if term < 1e-18 * (1.0 + i0m1):
                break
        lg = math.log(0.5 * z) + EULER_GAMMA
        return math.log(2.0) - EULER_GAMMA - lg * i0m1 + s0
    return k0k1(z)[0] + math.log(z)


@numba.njit(cache=True)
def _fill_k0k1(x, out0, out1):
    for i in range(x.shape[0]):
        out0[i], out1[i] = k0k1(x[i])


@numba.njit(cache=True)
def _fill_scaled(x, out0, out1):
    for i in range(x.shape[0]):
        out0[i], out1[i] = k0k1_scaled(x[i])


def _checked(x):
    arr = np.asarray(x, dtype=np.float64)
    if not np.all(np.isfinite(arr)) or np.any(arr <= 0.0):
        raise ValueError("modified Bessel K requires finite x > 0")
    return arr


def _evaluate(x, filler):
    arr = _checked(x)
    flat = np.ascontiguousarray(arr.ravel())
    a = np.empty_like(flat)
    b = np.empty_like(flat)
    filler(flat, a, b)
    if arr.ndim == 0:
        return float(a[0]), float(b[0])
    return a.reshape(arr.shape), b.reshape(arr.shape)


def bessel_k0(x):
    """K0(x) for x > 0 (float or array)."""
    return _evaluate(x, _fill_k0k1)[0]


def bessel_k1(x):
    """K1(x) for x > 0 (float or array)."""
    return _evaluate(x, _fill_k0k1)[1]


@dataclass(frozen=True)
class BesselPair:
    k0: float | np.ndarray
    k1: float | np.ndarray
    argument: float | np.ndarray


def bessel_k_scaled(x) -> BesselPair:
    """Return ``BesselPair(e^x K0(x), e^x K1(x), x)``; never underflows."""
    k0, k1 = _evaluate(x, _fill_scaled)
    arg = float(x) if np.ndim(x) == 0 else np.asarray(x, dtype=np.float64)
    return BesselPair(k0, k1, arg)
