"""Time evolution of vortex configurations.

Right-hand sides are callables ``config -> (N, 2) velocities``.  Two are
provided: :func:`rhs_direct` (exact pair sum) and :func:`rhs_fast`
(treecode plus short-range correction, blob kernel only).  Integration is
classical fixed-step RK4; :func:`picard_flow` is an independent solver that
iterates on frozen particle paths.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import partial

import numpy as np

from .kernel import SingularityError
from .summation import pair_velocity
from .treecode import fast_blob_velocity, make_plan
from .vortex_system import (
    InvariantSnapshot,
    VortexConfiguration,
    _raise_collision,
    invariants,
)


@dataclass
class Trajectory:
    times: list = field(default_factory=list)
    states: list = field(default_factory=list)
    snapshots: list = field(default_factory=list)

    def append(self, t, state, snapshot=True):
        if self.states and state.n != self.states[0].n:
            raise ValueError("particle count changed along a trajectory")
        self.times.append(float(t))
        self.states.append(state)
        self.snapshots.append(invariants(state) if snapshot else None)

    @property
    def positions(self):
        """Array of shape (len(times), N, 2)."""
        return np.stack([s.positions for s in self.states])

    @property
    def final(self):
        return self.states[-1]

    def __len__(self):
        return len(self.times)


def rhs_direct(config: VortexConfiguration):
    """dx_i/dt = sum_{j != i} G_j K(x_i, x_j) by the exact double loop."""
    pos = config.positions
    vel, hit = pair_velocity(pos, pos, config.circulations, config.kind.alpha_or_zero, True)
    if np.any(hit >= 0):
        _raise_collision(hit)
    return vel


def rhs_fast(config: VortexConfiguration, rel_tol=1e-6):
    """Treecode velocities, within ``rel_tol * sum|G| / (2 pi alpha)`` of direct."""
    if not config.kind.is_blob:
        raise ValueError("rhs_fast supports only the bessel-blob kernel")
    plan = make_plan(rel_tol)
    return fast_blob_velocity(
        config.positions, config.positions, config.circulations, config.kind.alpha, plan
    )


def fast_evaluator(rel_tol=1e-6):
    return partial(rhs_fast, rel_tol=rel_tol)


def step_rk4(config: VortexConfiguration, dt, rhs=rhs_direct):
    """One classical Runge-Kutta step; circulations are carried unchanged."""
    if not dt > 0:
        raise ValueError("dt must be positive")
    x = config.positions
    k1 = rhs(config)
    k2 = rhs(config.with_positions(x + 0.5 * dt * k1))
    k3 = rhs(config.with_positions(x + 0.5 * dt * k2))
    k4 = rhs(config.with_positions(x + dt * k3))
    return config.with_positions(x + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4))


def step_schedule(t_end, dt):
    """Step start times and sizes: whole steps plus one shortened final step."""
    if not (t_end > 0 and dt > 0):
        raise ValueError("t_end and dt must be positive")
    n = int(math.floor(t_end / dt))
    if n * dt > t_end:
        n -= 1
    rest = t_end - n * dt
    if rest <= 1e-12 * t_end:
        rest = 0.0
    starts = [k * dt for k in range(n)]
    sizes = [dt] * n
    if rest > 0.0:
        starts.append(n * dt)
        sizes.append(rest)
    return starts, sizes


def integrate(config: VortexConfiguration, t_end, dt, record_every=1, rhs=rhs_direct,
              snapshots=True):
    """Fixed-step RK4 from t = 0 to ``t_end``.

    States are recorded at t = 0, every ``record_every`` steps and at
    ``t_end``.  A point-vortex collision raises :class:`SingularityError`
    carrying the step start time.
    """
    if int(record_every) < 1:
        raise ValueError("record_every must be >= 1")
    starts, sizes = step_schedule(t_end, dt)
    traj = Trajectory()
    traj.append(0.0, config, snapshots)
    state = config
    last = len(sizes) - 1
    for k, (t0, h) in enumerate(zip(starts, sizes)):
        try:
            state = step_rk4(state, h, rhs)
        except SingularityError as err:
            raise SingularityError(
                f"{err} during the step starting at t = {t0!r}",
                indices=err.indices,
                time=t0,
            ) from None
        t1 = t_end if k == last else (k + 1) * dt
        if (k + 1) % record_every == 0 or k == last:
            traj.append(t1, state, snapshots)
    return traj


def _frozen_velocity(points, sources, gammas, alpha):
    vel, _ = pair_velocity(points, sources, gammas, alpha, False)
    return vel


def picard_flow(config: VortexConfiguration, t_end, dt, max_iters=50, tol=1e-10):
    """Successive approximations on frozen particle paths.

    Iterate 0 is the identity flow.  Iterate n solves
    ``dx_i/dt = sum_j G_j K(x_i(t), x_j^{n-1}(t))`` by RK4, with the frozen
    paths interpolated by cubic Hermite polynomials at the half steps (the
    j = i term is kept: it is the particle's previous path, not itself).

    Returns the final trajectory and the distances
    ``sup_{i,t} |x_i^n - x_i^{n-1}|`` for n = 1, 2, ...; iteration stops
    once a distance falls below ``tol``.  Non-convergence is not an error.
    """
    if not config.kind.is_blob:
        raise ValueError("picard_flow requires the bessel-blob kernel")
    alpha = config.kind.alpha
    gam = np.ascontiguousarray(config.circulations)
    starts, sizes = step_schedule(t_end, dt)
    nsteps = len(sizes)
    times = np.concatenate([[0.0], np.asarray(starts[1:] + [t_end])])
    x0 = config.positions
    prev_x = np.repeat(x0[None], nsteps + 1, axis=0)
    prev_v = np.zeros_like(prev_x)
    distances = []
    for _ in range(max_iters):
        xs = np.empty_like(prev_x)
        vs = np.empty_like(prev_v)
        xs[0] = x0
        x = x0.copy()
        for k, h in enumerate(sizes):
            a, b = prev_x[k], prev_x[k + 1]
            mid = 0.5 * (a + b) + 0.125 * h * (prev_v[k] - prev_v[k + 1])
            k1 = _frozen_velocity(x, a, gam, alpha)
            k2 = _frozen_velocity(x + 0.5 * h * k1, mid, gam, alpha)
            k3 = _frozen_velocity(x + 0.5 * h * k2, mid, gam, alpha)
            k4 = _frozen_velocity(x + h * k3, b, gam, alpha)
            vs[k] = k1
            x = x + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
            xs[k + 1] = x
        vs[nsteps] = _frozen_velocity(x, prev_x[nsteps], gam, alpha)
        diff = xs - prev_x
        distances.append(float(np.hypot(diff[..., 0], diff[..., 1]).max()))
        prev_x, prev_v = xs, vs
        if distances[-1] < tol:
            break
    traj = Trajectory()
    for t, x in zip(times, prev_x):
        traj.append(t, config.with_positions(x))
    return traj, distances
