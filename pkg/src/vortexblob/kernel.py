"""Closed-form kernel quantities for the Euler and Bessel-blob vortex models.

Orientation: ``perp(v) = (-v[1], v[0])``, so positive circulation turns
counterclockwise.  The blob kernel is

    K^a(x, y) = g(|x - y|, a) * perp(x - y) / |x - y|,
    g(r, a)   = (1/2pi) * (1/r - K1(r/a)/a),

and the Euler kernel is the same expression with the Bessel term dropped.
``g(0, a) = 0`` by continuous extension, so a blob does not move itself.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numba
import numpy as np

from .specfun import EULER_GAMMA, k0_plus_log, k0k1, k1_complement, k1_scalar

TWO_PI = 2.0 * math.pi

EULER_POINT = "euler-point"
BESSEL_BLOB = "bessel-blob"


class SingularityError(ArithmeticError):
    """Raised when the singular point-vortex kernel is evaluated at r = 0."""

    def __init__(self, message, indices=None, time=None):
        super().__init__(message)
        self.indices = indices
        self.time = time


@dataclass(frozen=True)
class KernelKind:
    variant: str
    alpha: float | None = None

    def __post_init__(self):
        if self.variant == BESSEL_BLOB:
            if self.alpha is None or not math.isfinite(self.alpha) or self.alpha <= 0:
                raise ValueError(f"bessel-blob kernel needs finite alpha > 0, got {self.alpha!r}")
            object.__setattr__(self, "alpha", float(self.alpha))
        elif self.variant == EULER_POINT:
            if self.alpha is not None:
                raise ValueError("euler-point kernel takes no alpha")
        else:
            raise ValueError(f"unknown kernel variant {self.variant!r}")

    @classmethod
    def euler(cls):
        return cls(EULER_POINT)

    @classmethod
    def blob(cls, alpha):
        return cls(BESSEL_BLOB, alpha)

    @property
    def is_blob(self):
        return self.variant == BESSEL_BLOB

    @property
    def alpha_or_zero(self):
        """Alpha for the compiled loops; 0 encodes the singular kernel."""
        return self.alpha if self.is_blob else 0.0


# -- scalar kernels shared by the compiled summation loops -----------------


@numba.njit(cache=True)
def speed_scalar(r, alpha):
    """Tangential speed g(r, alpha); alpha == 0 means the Euler kernel."""
    if alpha == 0.0:
        return 1.0 / (TWO_PI * r)
    if r == 0.0:
        return 0.0
    return k1_complement(r / alpha) / (TWO_PI * alpha)


@numba.njit(cache=True)
def factor_scalar(r, alpha):
    """g(r)/r, the factor multiplying perp(x - y); 0 at r == 0 for the blob."""
    if alpha == 0.0:
        return 1.0 / (TWO_PI * r * r)
    if r == 0.0:
        return 0.0
    return k1_complement(r / alpha) / (TWO_PI * alpha * r)


@numba.njit(cache=True)
def green_scalar(r, alpha):
    """G(r): (ln r)/2pi for Euler, (K0(r/a) + ln r)/2pi for the blob."""
    if alpha == 0.0:
        return math.log(r) / TWO_PI
    if r == 0.0:
        return (math.log(2.0 * alpha) - EULER_GAMMA) / TWO_PI
    return (k0_plus_log(r / alpha) + math.log(alpha)) / TWO_PI


# -- public vectorized API --------------------------------------------------


def _nonneg(r, name="r", strict=False):
    arr = np.asarray(r, dtype=np.float64)
    bad = arr <= 0 if strict else arr < 0
    if np.any(bad) or not np.all(np.isfinite(arr)):
        cmp = "> 0" if strict else ">= 0"
        raise ValueError(f"{name} must be finite and {cmp}")
    return arr


def _alpha(alpha):
    a = float(alpha)
    if not (a > 0 and math.isfinite(a)):
        raise ValueError("alpha must be finite and > 0")
    return a


def _out(arr, like):
    return float(arr) if np.ndim(like) == 0 else arr


@numba.njit(cache=True)
def _map2(f, r, alpha, out):
    for i in range(r.shape[0]):
        out[i] = f(r[i], alpha)


def _apply(f, r, alpha):
    flat = np.ascontiguousarray(np.ravel(r))
    out = np.empty_like(flat)
    _map2(f, flat, alpha, out)
    return out.reshape(np.shape(r))


def phi_modulus(r):
    """Quasi-Lipschitz modulus: r (1 - ln r) below 1, 1 above."""
    arr = _nonneg(r)
    with np.errstate(divide="ignore", invalid="ignore"):
        val = np.where(arr < 1.0, arr * (1.0 - np.log(arr)), 1.0)
    val = np.where(arr == 0.0, 0.0, val)
    return _out(val, r)


def stream_green(r, alpha):
    """Blob stream function G^a(r) = (K0(r/a) + ln r) / 2pi."""
    arr = _nonneg(r, strict=True)
    return _out(_apply(green_scalar, arr, _alpha(alpha)), r)


def stream_green_at_zero(alpha):
    """Limit of G^a(r) as r -> 0+, (ln 2a - gamma) / 2pi."""
    return (math.log(2.0 * _alpha(alpha)) - EULER_GAMMA) / TWO_PI


def tangential_speed(r, alpha):
    """g(r, a) = (1/r - K1(r/a)/a) / 2pi, with g(0, a) = 0."""
    arr = _nonneg(r)
    return _out(_apply(speed_scalar, arr, _alpha(alpha)), r)


def kernel_difference_magnitude(r, alpha):
    """|K^a - K|(r) = K1(r/a) / (2 pi a)."""
    arr = _nonneg(r, strict=True)
    a = _alpha(alpha)
    k1 = _apply(_k1_over, arr / a, 1.0)
    return _out(k1 / (TWO_PI * a), r)


def blob_vorticity(r, alpha):
    """Blob profile chi^a(r) = K0(r/a) / (2 pi a^2); unit total mass."""
    arr = _nonneg(r, strict=True)
    a = _alpha(alpha)
    k0 = _apply(_k0_over, arr / a, 1.0)
    return _out(k0 / (TWO_PI * a * a), r)


@numba.njit(cache=True)
def _k1_over(z, _unused):
    return k1_scalar(z)


@numba.njit(cache=True)
def _k0_over(z, _unused):
    return k0k1(z)[0]


def perp(v):
    v = np.asarray(v, dtype=np.float64)
    return np.stack([-v[..., 1], v[..., 0]], axis=-1)


def velocity_kernel(x, y, kind: KernelKind):
    """K(x, y) for a single pair or broadcastable arrays of points."""
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    d = x - y
    r = np.hypot(d[..., 0], d[..., 1])
    if not kind.is_blob and np.any(r == 0.0):
        raise SingularityError("point-vortex kernel evaluated at coincident points")
    fac = _apply(factor_scalar, r, kind.alpha_or_zero)
    return fac[..., None] * perp(d)
