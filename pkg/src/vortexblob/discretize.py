"""Particle approximations of continuous vorticity and radial-flow oracles."""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy import integrate

from .kernel import KernelKind, TWO_PI, _apply, factor_scalar
from .vortex_system import VortexConfiguration

RADIAL = "radial"
GENERAL = "general"

_GAUSS_NODES = np.array([-math.sqrt(0.6), 0.0, math.sqrt(0.6)])
_GAUSS_WEIGHTS = np.array([5.0, 8.0, 5.0]) / 9.0


@dataclass(frozen=True, eq=False)
class ScalarVorticityField:
    """Compactly supported vorticity, radial or general.

    ``profile`` is ``omega(r)`` for radial fields (support ``r <= radius``)
    and ``omega(x, y)`` for general ones (support inside ``box``).  Both must
    accept numpy arrays.  ``enclosed`` optionally gives the closed form of
    ``int_0^r omega(s) s ds`` for radial fields.
    """

    kind: str
    profile: Callable
    radius: float | None = None
    box: tuple | None = None
    smoothness: str = "bounded"
    name: str = ""
    enclosed: Callable | None = None
    sup_norm: float | None = None
    breakpoints: tuple = ()

    def __post_init__(self):
        if self.kind == RADIAL:
            if not (self.radius is not None and self.radius > 0):
                raise ValueError("radial field needs a support radius > 0")
            if self.box is None:
                r = self.radius
                object.__setattr__(self, "box", (-r, r, -r, r))
        elif self.kind == GENERAL:
            if self.box is None:
                raise ValueError("general field needs a bounding box")
        else:
            raise ValueError(f"unknown field kind {self.kind!r}")
        x0, x1, y0, y1 = self.box
        if not (x1 >= x0 and y1 >= y0):
            raise ValueError("bounding box must be (xmin, xmax, ymin, ymax)")

    @property
    def is_radial(self):
        return self.kind == RADIAL

    def value(self, x, y):
        x = np.asarray(x, dtype=np.float64)
        y = np.asarray(y, dtype=np.float64)
        if self.is_radial:
            r = np.hypot(x, y)
            return np.where(r <= self.radius, self.profile(r), 0.0)
        return np.asarray(self.profile(x, y), dtype=np.float64) * np.ones_like(x)

    def l1_norm(self):
        if self.is_radial:
            pts = sorted(set(p for p in self.breakpoints if 0 < p < self.radius))
            val, _ = integrate.quad(
                lambda s: abs(float(self.profile(s))) * s, 0.0, self.radius,
                points=pts or None, limit=200, epsabs=1e-14, epsrel=1e-12,
            )
            return TWO_PI * val
        x0, x1, y0, y1 = self.box
        val, _ = integrate.dblquad(
            lambda y, x: abs(float(self.profile(x, y))), x0, x1, y0, y1,
            epsabs=1e-12, epsrel=1e-10,
        )
        return val

    def linf_norm(self):
        if self.sup_norm is not None:
            return self.sup_norm
        x0, x1, y0, y1 = self.box
        xs = np.linspace(x0, x1, 257)
        ys = np.linspace(y0, y1, 257)
        gx, gy = np.meshgrid(xs, ys)
        return float(np.abs(self.value(gx, gy)).max())


def rankine(radius=1.0, strength=1.0):
    """Constant vorticity ``strength`` on the disk r <= radius."""
    R, w = float(radius), float(strength)

    def enclosed(r):
        r = np.minimum(np.asarray(r, dtype=np.float64), R)
        return 0.5 * w * r * r

    return ScalarVorticityField(
        RADIAL, lambda r: w * np.ones_like(np.asarray(r, dtype=np.float64)),
        radius=R, smoothness="bounded", name=f"rankine({R!r}, {w!r})",
        enclosed=enclosed, sup_norm=abs(w), breakpoints=(R,),
    )


def bump(radius=1.0, strength=1.0):
    """C^1 bump ``strength * (1 - (r/R)^2)^2`` on r <= R."""
    R, w = float(radius), float(strength)

    def profile(r):
        q = 1.0 - (np.asarray(r, dtype=np.float64) / R) ** 2
        return w * q * q

    def enclosed(r):
        r = np.minimum(np.asarray(r, dtype=np.float64), R)
        u = (r / R) ** 2
        # int_0^r (1 - s^2/R^2)^2 s ds = (R^2/2) (u - u^2 + u^3/3)
        return w * 0.5 * R * R * (u - u * u + u ** 3 / 3.0)

    return ScalarVorticityField(
        RADIAL, profile, radius=R, smoothness="continuous",
        name=f"bump({R!r}, {w!r})", enclosed=enclosed, sup_norm=abs(w),
    )


_PRESETS = {"rankine": rankine, "bump": bump}
_PRESET_RE = re.compile(r"^\s*([a-z_]+)\s*\(\s*([^()]*)\)\s*$")


def field_from_preset(preset: str) -> ScalarVorticityField:
    """Parse ``"rankine(R, w)"`` or ``"bump(R, w)"``."""
    m = _PRESET_RE.match(preset)
    if not m or m.group(1) not in _PRESETS:
        raise ValueError(f"unknown field preset {preset!r}; expected rankine(R, w) or bump(R, w)")
    args = [a for a in (s.strip() for s in m.group(2).split(",")) if a]
    try:
        values = [float(a) for a in args]
    except ValueError:
        raise ValueError(f"non-numeric argument in preset {preset!r}") from None
    if len(values) > 2 or (values and values[0] <= 0):
        raise ValueError(f"preset {preset!r} takes (R > 0, w)")
    return _PRESETS[m.group(1)](*values)


def grid_approximation(field: ScalarVorticityField, h, kind: KernelKind):
    """Cell-integrated particle approximation on a uniform grid of size h.

    The grid covers the bounding box, centred on it.  Each cell's
    circulation is its integral of omega by tensor 3-point Gauss; the particle
    sits at the cell centre.  Cells with |G| < 1e-15 h^2 ||omega||_inf are
    dropped.
    """
    if not h > 0:
        raise ValueError("h must be positive")
    x0, x1, y0, y1 = field.box
    nx = max(1, int(math.ceil((x1 - x0) / h - 1e-9)))
    ny = max(1, int(math.ceil((y1 - y0) / h - 1e-9)))
    xs = 0.5 * (x0 + x1) + h * (np.arange(nx) - 0.5 * (nx - 1))
    ys = 0.5 * (y0 + y1) + h * (np.arange(ny) - 0.5 * (ny - 1))
    cx, cy = np.meshgrid(xs, ys, indexing="ij")
    cx, cy = cx.ravel(), cy.ravel()
    off = 0.5 * h * _GAUSS_NODES
    wts = np.outer(_GAUSS_WEIGHTS, _GAUSS_WEIGHTS).ravel() * (0.25 * h * h)
    ox, oy = np.meshgrid(off, off, indexing="ij")
    ox, oy = ox.ravel(), oy.ravel()
    vals = field.value(cx[:, None] + ox[None, :], cy[:, None] + oy[None, :])
    gam = vals @ wts
    sup = field.linf_norm()
    keep = np.abs(gam) >= 1e-15 * h * h * sup
    if sup == 0 or not np.any(keep):
        raise ValueError("field has empty support on this grid")
    return VortexConfiguration(np.c_[cx[keep], cy[keep]], gam[keep], kind)


def _check_radial(field, r):
    if not field.is_radial:
        raise ValueError("a radial field is required")
    r = np.asarray(r, dtype=np.float64)
    if np.any(r <= 0) or not np.all(np.isfinite(r)):
        raise ValueError("r must be finite and > 0")
    return r


def _enclosed(field, r):
    if field.enclosed is not None:
        return float(field.enclosed(r))
    top = min(r, field.radius)
    pts = [p for p in field.breakpoints if 0 < p < top]
    val, _ = integrate.quad(
        lambda s: float(field.profile(s)) * s, 0.0, top, points=pts or None,
        limit=200, epsabs=1e-15, epsrel=1e-13,
    )
    return val


def radial_euler_velocity(field: ScalarVorticityField, r):
    """Euler tangential speed (1/r) int_0^r omega(s) s ds of a radial field."""
    arr = _check_radial(field, r)
    out = np.array([_enclosed(field, float(ri)) / ri for ri in np.ravel(arr)])
    return float(out[0]) if arr.ndim == 0 else out.reshape(arr.shape)


def ring_kernel(r, s, alpha, nodes=256, tol=1e-10, max_nodes=1 << 16):
    """A(r, s) = int_0^{2pi} K^a_theta from a unit-density ring of radius s.

    The target is at (r, 0); the tangential component of K^a from the ring
    point s(cos t, sin t) is F(rho) (r - s cos t) with F = g(rho)/rho.  The
    integral is the periodic trapezoid rule, doubled until two successive
    values agree to ``tol``.
    """
    def trap(n):
        t = TWO_PI * np.arange(n) / n
        dx = r - s * np.cos(t)
        dy = -s * np.sin(t)
        rho = np.hypot(dx, dy)
        f = _apply(factor_scalar, rho, alpha)
        return TWO_PI * float(np.mean(f * dx))

    prev = trap(nodes)
    n = nodes
    while n < max_nodes:
        n *= 2
        cur = trap(n)
        if abs(cur - prev) <= tol * max(1.0, abs(cur)):
            return cur
        prev = cur
    return prev


def ring_radial_component(r, s, alpha, nodes=256):
    """Azimuthal integral of the radial component of K^a; zero by symmetry."""
    t = TWO_PI * np.arange(nodes) / nodes
    dx = r - s * np.cos(t)
    dy = -s * np.sin(t)
    rho = np.hypot(dx, dy)
    f = _apply(factor_scalar, rho, alpha)
    # radial unit vector at the target is (1, 0): K . e_r = -f dy
    return TWO_PI * float(np.mean(-f * dy))


def radial_alpha_velocity(field: ScalarVorticityField, r, alpha, tol=1e-10):
    """Steady Euler-alpha tangential speed int_0^R A(r, s) omega(s) s ds."""
    arr = _check_radial(field, r)
    a = float(alpha)
    if not a > 0:
        raise ValueError("alpha must be > 0")
    R = field.radius

    def one(ri):
        pts = sorted(set([p for p in (ri,) + tuple(field.breakpoints) if 0 < p < R]))
        val, _ = integrate.quad(
            lambda s: ring_kernel(ri, s, a, tol=tol) * float(field.profile(s)) * s,
            0.0, R, points=pts or None, limit=200, epsabs=1e-12, epsrel=1e-10,
        )
        return val

    out = np.array([one(float(ri)) for ri in np.ravel(arr)])
    return float(out[0]) if arr.ndim == 0 else out.reshape(arr.shape)
