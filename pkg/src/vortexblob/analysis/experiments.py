"""Trajectory-level experiments: co-adjoint residual, collapse, Picard, weak convergence."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import integrate as quadrature
from scipy.optimize import brentq
from scipy.special import i0e

from ..discretize import ScalarVorticityField, grid_approximation
from ..dynamics import Trajectory, integrate, picard_flow, rhs_direct, step_rk4
from ..kernel import KernelKind, TWO_PI, tangential_speed
from ..vortex_system import VortexConfiguration, min_pairwise_distance


# ---------------------------------------------------------------- test functions

@dataclass(frozen=True)
class GaussianTest:
    """phi(x, t) = exp(-|x - c|^2 / w^2) cos(omega t)."""

    center: tuple = (0.0, 0.0)
    width: float = 1.0
    omega: float = 0.0

    def _space(self, x):
        d = np.asarray(x, dtype=float) - np.asarray(self.center, dtype=float)
        return d, np.exp(-(d * d).sum(axis=-1) / self.width ** 2)

    def value(self, x, t):
        return self._space(x)[1] * math.cos(self.omega * t)

    def grad(self, x, t):
        d, e = self._space(x)
        return (-2.0 / self.width ** 2) * d * (e * math.cos(self.omega * t))[..., None]

    def dt(self, x, t):
        return -self.omega * math.sin(self.omega * t) * self._space(x)[1]


@dataclass(frozen=True)
class BumpTest:
    """Compactly supported phi = exp(1 - 1/(1 - rho^2)), rho = |x - c|/R < 1."""

    center: tuple = (0.0, 0.0)
    radius: float = 1.0
    omega: float = 0.0

    def _space(self, x):
        d = np.asarray(x, dtype=float) - np.asarray(self.center, dtype=float)
        q = 1.0 - (d * d).sum(axis=-1) / self.radius ** 2
        inside = q > 0
        safe = np.where(inside, q, 1.0)
        e = np.where(inside, np.exp(1.0 - 1.0 / safe), 0.0)
        # grad = -2 phi (x - c) / (R^2 q^2)
        g = np.where(inside, -2.0 * e / (self.radius ** 2 * safe * safe), 0.0)
        return d, e, g

    def value(self, x, t):
        return self._space(x)[1] * math.cos(self.omega * t)

    def grad(self, x, t):
        d, _, g = self._space(x)
        return d * (g * math.cos(self.omega * t))[..., None]

    def dt(self, x, t):
        return -self.omega * math.sin(self.omega * t) * self._space(x)[1]


def weak_coadjoint_residual(traj: Trajectory, phi, velocity=rhs_direct):
    """|int_0^T sum_i G_i (d_t phi + u . grad phi)(x_i, t) dt - [sum_i G_i phi(x_i, t)]_0^T|.

    ``phi`` provides ``value``, ``grad`` and ``dt``; the time integral is
    composite Simpson over the recorded states.
    """
    if len(traj) < 2:
        raise ValueError("the trajectory needs at least two recorded states")
    vals = []
    for t, state in zip(traj.times, traj.states):
        x = state.positions
        g = state.circulations
        u = velocity(state)
        dphi = phi.dt(x, t) + (u * phi.grad(x, t)).sum(axis=1)
        vals.append(float((g * dphi).sum()))
    lhs = float(quadrature.simpson(np.array(vals), x=np.array(traj.times)))
    s0, s1 = traj.states[0], traj.states[-1]
    end = float((s1.circulations * phi.value(s1.positions, traj.times[-1])).sum())
    start = float((s0.circulations * phi.value(s0.positions, traj.times[0])).sum())
    return abs(lhs - (end - start))


# ---------------------------------------------------------------- collapse

class CollapseSearchError(ValueError):
    pass


COLLAPSE_CIRCULATIONS = (2.0, 2.0, -1.0)


def _pair_list(n):
    return [(i, j) for i in range(n) for j in range(i + 1, n)]


def angular_condition(positions, gammas):
    """sum_{i<j} G_i G_j l_ij^2, zero for a self-similar collapse."""
    x = np.asarray(positions, dtype=float)
    return sum(gammas[i] * gammas[j] * float(((x[i] - x[j]) ** 2).sum())
               for i, j in _pair_list(len(gammas)))


def squared_distance_rates(config: VortexConfiguration):
    """d(ln l_ij^2)/dt for every pair under the configuration's own kernel."""
    x = config.positions
    u = rhs_direct(config)
    out = []
    for i, j in _pair_list(config.n):
        d = x[i] - x[j]
        out.append(2.0 * float((d * (u[i] - u[j])).sum()) / float((d * d).sum()))
    return np.array(out)


def find_collapse_configuration(gammas=COLLAPSE_CIRCULATIONS):
    """Three point vortices satisfying the classical self-similar collapse conditions.

    Vortices 1 and 2 sit at (-1/2, 0) and (1/2, 0); vortex 3 at (1/2, b) with
    b found by root-finding on the angular-impulse condition.  The mirror
    image b -> -b expands instead of collapsing, so the orientation with
    negative (and equal) pair rates is kept.
    """
    g = np.asarray(gammas, dtype=float)
    if g.shape != (3,):
        raise CollapseSearchError("the collapse search needs exactly three circulations")
    harmonic = g[0] * g[1] + g[0] * g[2] + g[1] * g[2]
    if abs(harmonic) > 1e-12 * float((g * g).sum()):
        raise CollapseSearchError(
            f"sum of pairwise circulation products is {harmonic!r}, not 0"
        )

    def place(b):
        return np.array([[-0.5, 0.0], [0.5, 0.0], [0.5, b]])

    f = lambda b: angular_condition(place(b), g)  # noqa: E731
    grid = np.geomspace(1e-3, 1e3, 200)
    vals = np.array([f(b) for b in grid])
    sign = np.flatnonzero(np.sign(vals[:-1]) != np.sign(vals[1:]))
    if sign.size == 0:
        raise CollapseSearchError("no root of the angular-impulse condition found")
    k = int(sign[0])
    b = brentq(f, grid[k], grid[k + 1], xtol=1e-15, rtol=1e-15)
    euler = KernelKind.euler()
    for cand in (b, -b):
        config = VortexConfiguration(place(cand), g, euler)
        rates = squared_distance_rates(config)
        spread = float(rates.max() - rates.min())
        if rates.max() < 0 and spread <= 1e-9 * float(abs(rates).max()):
            return config
    raise CollapseSearchError("neither orientation collapses self-similarly")


@dataclass
class CollapseResult:
    setup: str
    config: VortexConfiguration
    trajectory: Trajectory
    min_distance: np.ndarray
    t_star: float | None = None
    slope: float | None = None
    halt_reason: str = ""
    reversal_error: float | None = None

    @property
    def floor(self):
        return float(self.min_distance[:, 1].min())

    @property
    def floor_ratio(self):
        return self.floor / float(self.min_distance[0, 1])


def _point_collapse(config, t_end, dt, stop_distance, resolution, dt_min):
    traj = Trajectory()
    traj.append(0.0, config, snapshot=False)
    series = [(0.0, min_pairwise_distance(config))]
    t, h, state = 0.0, dt, config
    reason = "reached t_end"
    while t < t_end:
        lmin = series[-1][1]
        if lmin < stop_distance:
            reason = "min distance below stop threshold"
            break
        vmax = float(np.hypot(*rhs_direct(state).T).max())
        while h * vmax > resolution * lmin and h >= dt_min:
            h *= 0.5
        if h < dt_min:
            reason = "step-size resolution exceeded"
            break
        step = min(h, t_end - t)
        state = step_rk4(state, step, rhs_direct)
        t += step
        traj.append(t, state, snapshot=False)
        series.append((t, min_pairwise_distance(state)))
    return traj, np.array(series), reason


def collapse_slope(series, t_star, upper=0.5):
    """Slope of log l_min against log(t* - t) over l_min < upper * l_min(0)."""
    t, l = series[:, 0], series[:, 1]
    keep = (t < t_star) & (l < upper * l[0])
    if keep.sum() < 3:
        return math.nan
    return float(np.polyfit(np.log(t_star - t[keep]), np.log(l[keep]), 1)[0])


def collapse_experiment(setup, t_end=None, dt=1e-3, alpha=0.1, config=None,
                        stop_distance=1e-3, resolution=0.05, reversal=True):
    """Point-kernel collapse versus its blob regularization.

    ``setup = "point"`` integrates the searched configuration with the Euler
    kernel, halving the step whenever one step would move a vortex more than
    ``resolution`` times the current minimum distance, and stops below
    ``stop_distance``.  The collapse time t* is extrapolated from a linear
    fit of l_min^2 against t (exact for self-similar motion).

    ``setup = "blob"`` runs the same data with the blob kernel over
    [0, 2 t*] (t* from a point run when ``t_end`` is not given) and, if
    ``reversal`` is set, integrates back with negated circulations.
    """
    if config is None:
        config = find_collapse_configuration()
    if setup == "point":
        cfg = config.with_kind(KernelKind.euler())
        if t_end is None:
            rate = float(squared_distance_rates(cfg).max())
            t_end = 1.5 / -rate if rate < 0 else 10.0
        traj, series, reason = _point_collapse(cfg, t_end, dt, stop_distance,
                                               resolution, dt * 2.0 ** -40)
        t, l2 = series[:, 0], series[:, 1] ** 2
        slope_l2, icpt = np.polyfit(t, l2, 1)
        t_star = -icpt / slope_l2 if slope_l2 < 0 else math.inf
        return CollapseResult("point", cfg, traj, series, t_star,
                              collapse_slope(series, t_star), reason)
    if setup != "blob":
        raise ValueError(f"unknown collapse setup {setup!r}; expected 'blob' or 'point'")
    t_star = None
    if t_end is None:
        t_star = collapse_experiment("point", dt=dt, config=config).t_star
        t_end = 2.0 * t_star
    cfg = config.with_kind(KernelKind.blob(alpha))
    traj = integrate(cfg, t_end, dt, 1, rhs_direct, snapshots=False)
    series = np.array([(t, min_pairwise_distance(s)) for t, s in zip(traj.times, traj.states)])
    result = CollapseResult("blob", cfg, traj, series, t_star, None, "reached t_end")
    if reversal:
        back = integrate(traj.final.with_circulations(-cfg.circulations), t_end, dt,
                         1 << 30, rhs_direct, snapshots=False)
        d = back.final.positions - cfg.positions
        result.reversal_error = float(np.hypot(d[:, 0], d[:, 1]).max())
    return result


def reversal_check(config: VortexConfiguration, t_end, dt, rhs=rhs_direct):
    """Return (reversal error, forward error budget).

    The reversal error is the sup distance between the initial positions and
    those reached by integrating forward to ``t_end`` and then back with
    negated circulations.  The budget is the Richardson estimate of the
    forward RK4 error, 16/15 |x_dt(T) - x_{dt/2}(T)|.
    """
    big = 1 << 30
    fwd = integrate(config, t_end, dt, big, rhs, snapshots=False).final
    half = integrate(config, t_end, 0.5 * dt, big, rhs, snapshots=False).final
    back = integrate(fwd.with_circulations(-config.circulations), t_end, dt, big, rhs,
                     snapshots=False).final
    d = back.positions - config.positions
    e = fwd.positions - half.positions
    return (float(np.hypot(d[:, 0], d[:, 1]).max()),
            16.0 / 15.0 * float(np.hypot(e[:, 0], e[:, 1]).max()))


# ---------------------------------------------------------------- Picard

@dataclass
class PicardReport:
    distances: list
    trajectory: Trajectory
    converged: bool
    monotone_tail: bool
    message: str = ""


def picard_contraction_report(config, t_end, dt, max_iters=50, tol=1e-10):
    """Run the frozen-path iteration and summarise its contraction."""
    traj, dist = picard_flow(config, t_end, dt, max_iters, tol)
    converged = bool(dist) and dist[-1] < tol
    # the tail from the first iterate below 1e-2 of the first distance must decrease
    ref = dist[0] if dist and dist[0] > 0 else 1.0
    start = next((k for k, d in enumerate(dist) if d <= 1e-2 * ref), len(dist) - 1)
    tail = dist[start:]
    monotone = all(b < a or b == 0.0 for a, b in zip(tail, tail[1:]))
    if converged:
        msg = f"converged after {len(dist)} iterations, final distance {dist[-1]:.3e}"
    else:
        msg = (f"no convergence in {len(dist)} iterations; distances "
               + ", ".join(f"{d:.3e}" for d in dist[-5:]))
    return PicardReport(dist, traj, converged, monotone, msg)


# ---------------------------------------------------------------- weak convergence

@dataclass(frozen=True)
class GaussianProfile:
    """Radial test function exp(-r^2 / w^2)."""

    width: float = 1.0

    def __call__(self, r):
        return np.exp(-(np.asarray(r, dtype=float) / self.width) ** 2)

    def ring_average(self, rho, s):
        """int_0^{2 pi} phi(|rho e_1 - s e(theta)|) d theta in closed form."""
        w2 = self.width ** 2
        return TWO_PI * math.exp(-(rho - s) ** 2 / w2) * float(i0e(2.0 * rho * s / w2))


@dataclass(frozen=True)
class BlobSpeedProfile:
    """Radial test function |K^alpha|(r), continuous and decaying like 1/r."""

    alpha: float = 1.0

    def __call__(self, r):
        return tangential_speed(np.asarray(r, dtype=float), self.alpha)

    def ring_average(self, rho, s):
        f = lambda th: float(self(math.sqrt(max(rho * rho + s * s  # noqa: E731
                                                - 2 * rho * s * math.cos(th), 0.0))))
        val, _ = quadrature.quad(f, 0.0, math.pi, points=[0.0], limit=200,
                                 epsabs=1e-13, epsrel=1e-11)
        return 2.0 * val


def default_sample_grid(field: ScalarVorticityField, n=21):
    x0, x1, y0, y1 = field.box
    cx, cy = 0.5 * (x0 + x1), 0.5 * (y0 + y1)
    half = max(x1 - x0, y1 - y0)
    xs = np.linspace(cx - half, cx + half, n)
    ys = np.linspace(cy - half, cy + half, n)
    gx, gy = np.meshgrid(xs, ys, indexing="ij")
    return np.c_[gx.ravel(), gy.ravel()]


def convolution_oracle(field: ScalarVorticityField, phi, points):
    """int phi(|x - y|) omega(y) dy by adaptive quadrature at each point."""
    pts = np.asarray(points, dtype=float).reshape(-1, 2)
    if field.is_radial:
        R = field.radius
        brk = [p for p in field.breakpoints if 0 < p < R]
        rho = np.round(np.hypot(pts[:, 0], pts[:, 1]), 14)
        uniq, inv = np.unique(rho, return_inverse=True)
        vals = np.empty(uniq.size)
        for k, r in enumerate(uniq):
            v, _ = quadrature.quad(
                lambda s: float(field.profile(s)) * s * phi.ring_average(r, s),
                0.0, R, points=brk or None, limit=200, epsabs=1e-14, epsrel=1e-12,
            )
            vals[k] = v
        return vals[inv]
    x0, x1, y0, y1 = field.box
    out = np.empty(len(pts))
    for k, (px, py) in enumerate(pts):
        out[k], _ = quadrature.dblquad(
            lambda y, x: float(field.profile(x, y)) * float(phi(math.hypot(px - x, py - y))),
            x0, x1, y0, y1, epsabs=1e-13, epsrel=1e-11,
        )
    return out


def uniform_weak_convergence_check(field: ScalarVorticityField, phi, h_sequence,
                                   points=None):
    """sup over sample points of |sum_c G_c phi(x - x_c) - (phi * omega)(x)| per h."""
    if points is None:
        points = default_sample_grid(field)
    points = np.asarray(points, dtype=float).reshape(-1, 2)
    if field.linf_norm() == 0.0:
        return [0.0 for _ in h_sequence]
    exact = convolution_oracle(field, phi, points)
    errors = []
    for h in h_sequence:
        q = grid_approximation(field, h, KernelKind.euler())
        d = points[:, None, :] - q.positions[None, :, :]
        approx = phi(np.hypot(d[..., 0], d[..., 1])) @ q.circulations
        errors.append(float(np.abs(approx - exact).max()))
    return errors
