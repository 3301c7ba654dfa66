"""Empirical checks of the kernel estimates and the log-Gronwall envelope."""

from __future__ import annotations

import math

import numpy as np

from ..discretize import ScalarVorticityField, radial_euler_velocity
from ..kernel import (
    KernelKind,
    kernel_difference_magnitude,
    phi_modulus,
    velocity_kernel,
)


def _unit(theta):
    return np.stack([np.cos(theta), np.sin(theta)], axis=-1)


def _log_uniform(rng, lo, hi, n):
    return np.exp(rng.uniform(math.log(lo), math.log(hi), n))


def quasi_lipschitz_triples(n_samples, seed, alpha):
    """Seeded triples (x, x', y) with |x - x'| log-uniform in [1e-6, 10] alpha.

    y is uniform in a disk about the midpoint of x and x' of radius
    |x - x'|/2 + alpha, where the ratio is largest; only relative
    positions matter, so each triple stands for its whole congruence class.
    """
    rng = np.random.default_rng(seed)
    x = alpha * rng.uniform(-1.0, 1.0, (n_samples, 2))
    r = _log_uniform(rng, 1e-6, 10.0, n_samples)
    xp = x + alpha * r[:, None] * _unit(rng.uniform(0, 2 * np.pi, n_samples))
    rho = (0.5 * r + 1.0) * alpha * np.sqrt(rng.uniform(0.0, 1.0, n_samples))
    y = 0.5 * (x + xp) + rho[:, None] * _unit(rng.uniform(0, 2 * np.pi, n_samples))
    return x, xp, y


def quasi_lipschitz_ratio(kind: KernelKind, n_samples, seed=0):
    """sup |K(x,y) - K(x',y)| * alpha / phi(|x - x'| / alpha) over samples."""
    if not kind.is_blob:
        raise ValueError("the quasi-Lipschitz ratio is defined for the blob kernel")
    if n_samples < 1:
        raise ValueError("n_samples must be >= 1")
    a = kind.alpha
    x, xp, y = quasi_lipschitz_triples(n_samples, seed, a)
    diff = velocity_kernel(x, y, kind) - velocity_kernel(xp, y, kind)
    num = np.hypot(diff[:, 0], diff[:, 1]) * a
    dxp = x - xp
    den = phi_modulus(np.hypot(dxp[:, 0], dxp[:, 1]) / a)
    ratio = np.where(den > 0, num / np.where(den > 0, den, 1.0), 0.0)
    return float(ratio.max())


def euler_quasi_lipschitz_ratio(field: ScalarVorticityField, n_samples, seed=0):
    """sup |u(x) - u(x')| / phi(|x - x'|) for the steady Euler flow of a radial field."""
    rng = np.random.default_rng(seed)
    R = field.radius
    x = rng.uniform(-2 * R, 2 * R, (n_samples, 2))
    d = _log_uniform(rng, 1e-6, 2.0, n_samples)
    xp = x + d[:, None] * _unit(rng.uniform(0, 2 * np.pi, n_samples))

    def velocity(p):
        r = np.hypot(p[:, 0], p[:, 1])
        r = np.where(r == 0, 1e-300, r)
        ut = radial_euler_velocity(field, r)
        return np.stack([-p[:, 1], p[:, 0]], axis=1) * (ut / r)[:, None]

    du = velocity(x) - velocity(xp)
    return float((np.hypot(du[:, 0], du[:, 1]) / phi_modulus(d)).max())


def scaling_identity_residual(n_samples, seed=0):
    """Max relative residual of |K^a|(r) = |K^1|(r/a)/a and the same for K^a - K.

    The source sits at the origin so the displacement is exact.
    """
    rng = np.random.default_rng(seed)
    alpha = _log_uniform(rng, 1e-3, 1e3, n_samples)
    r = alpha * _log_uniform(rng, 1e-6, 1e4, n_samples)
    x = r[:, None] * _unit(rng.uniform(0, 2 * np.pi, n_samples))
    origin = np.zeros(2)
    worst = 0.0
    for a, ri, xi in zip(alpha, r, x):
        lhs = np.hypot(*velocity_kernel(xi, origin, KernelKind.blob(a)))
        rhs = np.hypot(*velocity_kernel(xi / a, origin, KernelKind.blob(1.0))) / a
        dl = kernel_difference_magnitude(ri, a)
        dr = kernel_difference_magnitude(ri / a, 1.0) / a
        for p, q in ((lhs, rhs), (dl, dr)):
            scale = max(abs(p), abs(q))
            if scale > 0:
                worst = max(worst, abs(p - q) / scale)
    return worst


def _ratio_term(beta, tau):
    """(beta^{e^-tau} - beta) / (-ln beta), stable as beta -> 1."""
    s = -math.log(beta)
    c = 1.0 - math.exp(-tau)
    return math.exp(-s) * math.expm1(s * c) / s


def gronwall_envelope(t, alpha, k1=1.0, k2=1.0):
    """Log-Gronwall bound on sup_x |eta^a - eta| at time t.

    With ``tau = k2 t`` and ``beta = (k1/k2) alpha``,

        rho <= (e^tau - 1)/e * beta^{e^-tau} + e^tau (beta^{e^-tau} - beta)/(-ln beta).
    """
    if not (0.0 < alpha < 1.0):
        raise ValueError("alpha must lie in (0, 1)")
    if t < 0 or k1 <= 0 or k2 <= 0:
        raise ValueError("t >= 0 and k1, k2 > 0 required")
    tau = k2 * t
    beta = k1 * alpha / k2
    if not (0.0 < beta < 1.0):
        raise ValueError("k1 * alpha / k2 must lie in (0, 1)")
    if tau == 0.0:
        return 0.0
    p = beta ** math.exp(-tau)
    return math.expm1(tau) / math.e * p + math.exp(tau) * _ratio_term(beta, tau)


def fit_gronwall_constants(times, errors, alpha, k2_grid=None):
    """Smallest k1 per k2 with the envelope above all errors; tightest pair wins.

    Tightness is measured by the envelope's excess at the final time.
    """
    times = np.asarray(times, dtype=float)
    errors = np.asarray(errors, dtype=float)
    if k2_grid is None:
        k2_grid = np.geomspace(1e-2, 10.0, 31)
    mask = times > 0
    best = None
    for k2 in k2_grid:
        hi = k2 / alpha * (1 - 1e-12)

        def covers(k1):
            return all(gronwall_envelope(t, alpha, k1, k2) >= e
                       for t, e in zip(times[mask], errors[mask]))

        if not covers(hi):
            continue
        lo = hi * 1e-12
        if covers(lo):
            k1 = lo
        else:
            for _ in range(100):
                mid = math.sqrt(lo * hi)
                if covers(mid):
                    hi = mid
                else:
                    lo = mid
                if hi / lo < 1 + 1e-10:
                    break
            k1 = hi
        excess = gronwall_envelope(times[-1], alpha, k1, k2)
        if best is None or excess < best[2]:
            best = (float(k1), float(k2), excess)
    if best is None:
        raise ValueError("no envelope in the search range covers the errors")
    return best[0], best[1]
