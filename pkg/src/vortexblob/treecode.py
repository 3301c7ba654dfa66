"""Fast blob velocity: treecode for the point-vortex part plus a short-range
Bessel correction.

The blob kernel splits as ``K^a = K + C`` with

    C(x, y) = -K1(r/a) / (2 pi a) * perp(x - y) / r,    r = |x - y|,

which decays like ``exp(-r/a)``.  ``K`` is summed with a Barnes-Hut
quadtree of complex multipole expansions; ``C`` is summed only over pairs
closer than ``r_c`` found with a uniform cell grid of spacing ``r_c``.

Error budget, in units of ``sum|G| / (2 pi a)``:

* cutoff truncation  ``K1(r_c/a) <= rel_tol/4``
* multipole truncation ``theta^(p+1) / (1 - theta) <= rel_tol/2``, for
  cells accepted at distance ``d >= a`` (so ``1/d <= 1/a``)
* the ``z K1(z)`` lookup table is accurate to ~1e-15 and does not count.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numba
import numpy as np

from .specfun import k0k1

TWO_PI = 2.0 * math.pi
_TABLE_LO = 0.5
_TABLE_STEP = 1.0 / 128.0
_STACK = 512
_MAX_DEPTH = 48


@dataclass(frozen=True)
class FastPlan:
    rel_tol: float
    theta: float
    order: int
    z_cut: float
    leaf_size: int


def multipole_order(rel_tol, theta):
    p = 0
    while theta ** (p + 1) / (1.0 - theta) > 0.5 * rel_tol:
        p += 1
    return p


def cutoff_argument(target):
    """Solve K1(z) = target for z by bisection (K1 is decreasing)."""
    lo, hi = 1e-12, 1.0
    while k0k1(hi)[1] > target:
        hi *= 2.0
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if k0k1(mid)[1] > target:
            lo = mid
        else:
            hi = mid
        if hi - lo <= 1e-15 * hi:
            break
    return hi


def make_plan(rel_tol, theta=0.5, leaf_size=32):
    if not (0.0 < rel_tol < 1.0):
        raise ValueError("rel_tol must lie in (0, 1)")
    return FastPlan(
        rel_tol=rel_tol,
        theta=theta,
        order=multipole_order(rel_tol, theta),
        z_cut=cutoff_argument(0.25 * rel_tol),
        leaf_size=leaf_size,
    )


# -- z K1(z) lookup: piecewise quintic Hermite ------------------------------


@lru_cache(maxsize=16)
def zk1_table(z_cut):
    """Per-interval monomial coefficients of z K1(z) on [_TABLE_LO, z_cut]."""
    n = max(1, int(math.ceil((z_cut - _TABLE_LO) / _TABLE_STEP)))
    h = _TABLE_STEP
    z = _TABLE_LO + h * np.arange(n + 1)
    f = np.empty_like(z)
    d1 = np.empty_like(z)
    d2 = np.empty_like(z)
    for i, zi in enumerate(z):
        k0, k1 = k0k1(zi)
        f[i] = zi * k1
        d1[i] = -zi * k0
        d2[i] = zi * k1 - k0
    f0, f1 = f[:-1], f[1:]
    a0, a1 = h * d1[:-1], h * d1[1:]
    b0, b1 = h * h * d2[:-1], h * h * d2[1:]
    df = f1 - f0
    coef = np.empty((n, 6))
    coef[:, 0] = f0
    coef[:, 1] = a0
    coef[:, 2] = 0.5 * b0
    coef[:, 3] = 10 * df - 6 * a0 - 4 * a1 - 0.5 * (3 * b0 - b1)
    coef[:, 4] = -15 * df + 8 * a0 + 7 * a1 + 0.5 * (3 * b0 - 2 * b1)
    coef[:, 5] = 6 * df - 3 * (a0 + a1) - 0.5 * (b0 - b1)
    return coef


@numba.njit(cache=True)
def zk1_lookup(z, coef):
    s = (z - _TABLE_LO) / _TABLE_STEP
    if s < 0.0:
        return z * k0k1(z)[1]
    k = int(s)
    if k >= coef.shape[0]:
        if k > coef.shape[0]:
            return z * k0k1(z)[1]
        k = coef.shape[0] - 1
    t = s - k
    c = coef[k]
    return c[0] + t * (c[1] + t * (c[2] + t * (c[3] + t * (c[4] + t * c[5]))))


# -- quadtree ----------------------------------------------------------------


@numba.njit(cache=True)
def _grow(arr, size):
    out = np.empty((size,) + arr.shape[1:], dtype=arr.dtype)
    out[: arr.shape[0]] = arr
    return out


@numba.njit(cache=True)
def build_tree(px, py, leaf_size):
    """Quadtree over points; returns permutation and flat node arrays."""
    n = px.shape[0]
    perm = np.arange(n)
    tmp = np.empty(n, dtype=np.int64)
    cap = 64 + 4 * n
    start = np.empty(cap, dtype=np.int64)
    stop = np.empty(cap, dtype=np.int64)
    child = np.empty(cap, dtype=np.int64)
    nchild = np.zeros(cap, dtype=np.int64)
    box = np.empty((cap, 3))  # cx, cy, half
    depth = np.zeros(cap, dtype=np.int64)

    xmin, xmax = px.min(), px.max()
    ymin, ymax = py.min(), py.max()
    half = 0.5 * max(xmax - xmin, ymax - ymin)
    half = half * (1.0 + 1e-12) + 1e-300
    start[0] = 0
    stop[0] = n
    box[0, 0] = 0.5 * (xmin + xmax)
    box[0, 1] = 0.5 * (ymin + ymax)
    box[0, 2] = half
    count = 1
    node = 0
    while node < count:
        s = start[node]
        e = stop[node]
        if e - s > leaf_size and depth[node] < _MAX_DEPTH:
            cx = box[node, 0]
            cy = box[node, 1]
            hh = 0.5 * box[node, 2]
            counts = np.zeros(4, dtype=np.int64)
            for k in range(s, e):
                j = perm[k]
                q = (1 if px[j] >= cx else 0) + (2 if py[j] >= cy else 0)
                counts[q] += 1
            offs = np.zeros(4, dtype=np.int64)
            acc = s
            for q in range(4):
                offs[q] = acc
                acc += counts[q]
            for k in range(s, e):
                j = perm[k]
                q = (1 if px[j] >= cx else 0) + (2 if py[j] >= cy else 0)
                tmp[offs[q]] = j
                offs[q] += 1
            perm[s:e] = tmp[s:e]
            if count + 4 > start.shape[0]:
                size = 2 * start.shape[0]
                start = _grow(start, size)
                stop = _grow(stop, size)
                child = _grow(child, size)
                nchild = _grow(nchild, size)
                nchild[count:] = 0
                box = _grow(box, size)
                depth = _grow(depth, size)
            child[node] = count
            acc = s
            for q in range(4):
                if counts[q] == 0:
                    continue
                start[count] = acc
                stop[count] = acc + counts[q]
                acc += counts[q]
                box[count, 0] = cx + (hh if q & 1 else -hh)
                box[count, 1] = cy + (hh if q & 2 else -hh)
                box[count, 2] = hh
                depth[count] = depth[node] + 1
                nchild[count] = 0
                nchild[node] += 1
                count += 1
        node += 1
    return perm, start[:count], stop[:count], child[:count], nchild[:count], box[:count]


@numba.njit(cache=True)
def node_moments(px, py, g, perm, start, stop, box, order):
    """Multipole coefficients a_k = sum G_j (z_j - c)^k and source radii."""
    m = start.shape[0]
    coef = np.zeros((m, order + 1), dtype=np.complex128)
    radius = np.zeros(m)
    for node in range(m):
        cx = box[node, 0]
        cy = box[node, 1]
        rmax = 0.0
        for k in range(start[node], stop[node]):
            j = perm[k]
            dz = complex(px[j] - cx, py[j] - cy)
            rmax = max(rmax, abs(dz))
            w = complex(g[j], 0.0)
            for q in range(order + 1):
                coef[node, q] += w
                w *= dz
        radius[node] = rmax
    return coef, radius


@numba.njit(parallel=True, cache=True)
def tree_velocity(tx, ty, px, py, g, perm, start, stop, child, nchild, box,
                  coef, radius, theta, dmin):
    """Point-vortex velocity at targets; coincident pairs are skipped."""
    m = tx.shape[0]
    order = coef.shape[1] - 1
    out = np.zeros((m, 2))
    for i in numba.prange(m):
        x = tx[i]
        y = ty[i]
        stack = np.empty(_STACK, dtype=np.int64)
        top = 0
        stack[0] = 0
        top = 1
        wr = 0.0
        wi = 0.0
        while top > 0:
            top -= 1
            node = stack[top]
            dx = x - box[node, 0]
            dy = y - box[node, 1]
            d = math.hypot(dx, dy)
            cnt = stop[node] - start[node]
            if d >= dmin and radius[node] <= theta * d and cnt > order:
                zeta = 1.0 / complex(dx, dy)
                acc = coef[node, order]
                for q in range(order - 1, -1, -1):
                    acc = acc * zeta + coef[node, q]
                acc *= zeta
                wr += acc.real
                wi += acc.imag
            elif nchild[node] == 0:
                for k in range(start[node], stop[node]):
                    j = perm[k]
                    ddx = x - px[j]
                    ddy = y - py[j]
                    r2 = ddx * ddx + ddy * ddy
                    if r2 == 0.0:
                        continue
                    s = g[j] / r2
                    wr += s * ddx
                    wi -= s * ddy
            else:
                c0 = child[node]
                for c in range(c0, c0 + nchild[node]):
                    stack[top] = c
                    top += 1
        out[i, 0] = wi / TWO_PI
        out[i, 1] = wr / TWO_PI
    return out


# -- short-range correction on a cell grid ------------------------------------


@numba.njit(cache=True)
def build_cells(px, py, h):
    x0 = px.min()
    y0 = py.min()
    nx = int((px.max() - x0) / h) + 1
    ny = int((py.max() - y0) / h) + 1
    keys = np.empty(px.shape[0], dtype=np.int64)
    for j in range(px.shape[0]):
        ix = int((px[j] - x0) / h)
        iy = int((py[j] - y0) / h)
        keys[j] = ix * ny + iy
    order = np.argsort(keys, kind="mergesort")
    return order, keys[order], x0, y0, nx, ny


@numba.njit(parallel=True, cache=True)
def correction_velocity(tx, ty, px, py, g, order, skeys, x0, y0, nx, ny, h,
                        alpha, table):
    m = tx.shape[0]
    out = np.zeros((m, 2))
    rc2 = h * h
    for i in numba.prange(m):
        x = tx[i]
        y = ty[i]
        cx = int(math.floor((x - x0) / h))
        cy = int(math.floor((y - y0) / h))
        u = 0.0
        v = 0.0
        for ix in range(cx - 1, cx + 2):
            if ix < 0 or ix >= nx:
                continue
            for iy in range(cy - 1, cy + 2):
                if iy < 0 or iy >= ny:
                    continue
                key = ix * ny + iy
                lo = np.searchsorted(skeys, key, side="left")
                hi = np.searchsorted(skeys, key, side="right")
                for k in range(lo, hi):
                    j = order[k]
                    dx = x - px[j]
                    dy = y - py[j]
                    r2 = dx * dx + dy * dy
                    if r2 == 0.0 or r2 > rc2:
                        continue
                    r = math.sqrt(r2)
                    f = g[j] * zk1_lookup(r / alpha, table) / r2
                    u += f * dy
                    v -= f * dx
        out[i, 0] = u / TWO_PI
        out[i, 1] = v / TWO_PI
    return out


def fast_blob_velocity(targets, sources, gammas, alpha, plan: FastPlan):
    """Blob velocity at ``targets`` from nonzero-circulation ``sources``."""
    targets = np.ascontiguousarray(targets, dtype=np.float64)
    keep = gammas != 0.0
    src = np.ascontiguousarray(sources[keep], dtype=np.float64)
    g = np.ascontiguousarray(gammas[keep], dtype=np.float64)
    if src.shape[0] == 0:
        return np.zeros_like(targets)
    px, py = src[:, 0].copy(), src[:, 1].copy()
    tx, ty = targets[:, 0].copy(), targets[:, 1].copy()
    perm, start, stop, child, nchild, box = build_tree(px, py, plan.leaf_size)
    coef, radius = node_moments(px, py, g, perm, start, stop, box, plan.order)
    far = tree_velocity(tx, ty, px, py, g, perm, start, stop, child, nchild, box,
                        coef, radius, plan.theta, alpha)
    rc = alpha * plan.z_cut
    corder, skeys, x0, y0, nx, ny = build_cells(px, py, rc)
    near = correction_velocity(tx, ty, px, py, g, corder, skeys, x0, y0, nx, ny,
                               rc, alpha, zk1_table(plan.z_cut))
    return far + near
