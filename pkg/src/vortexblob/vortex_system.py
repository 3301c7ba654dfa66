"""Point-vortex / blob configurations, induced velocities and first integrals."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.spatial import cKDTree

from .kernel import BESSEL_BLOB, EULER_POINT, KernelKind, SingularityError
from .summation import pair_energy, pair_velocity


def _frozen(a):
    a = np.array(a, dtype=np.float64)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class VortexConfiguration:
    """N weighted particles: the discrete measure sum_i G_i delta(x - x_i).

    Zero-circulation particles are allowed and act as passive tracers.
    """

    positions: np.ndarray
    circulations: np.ndarray
    kind: KernelKind

    def __post_init__(self):
        pos = _frozen(self.positions).reshape(-1, 2) if np.size(self.positions) else None
        if pos is None:
            raise ValueError("a configuration needs at least one particle")
        gam = _frozen(self.circulations).reshape(-1)
        if pos.shape[0] != gam.shape[0]:
            raise ValueError(
                f"{pos.shape[0]} positions but {gam.shape[0]} circulations"
            )
        if not (np.all(np.isfinite(pos)) and np.all(np.isfinite(gam))):
            raise ValueError("positions and circulations must be finite")
        object.__setattr__(self, "positions", pos)
        object.__setattr__(self, "circulations", gam)

    @property
    def n(self):
        return self.positions.shape[0]

    @property
    def total_variation(self):
        return float(np.abs(self.circulations).sum())

    def with_positions(self, positions):
        return VortexConfiguration(positions, self.circulations, self.kind)

    def with_circulations(self, circulations):
        return VortexConfiguration(self.positions, circulations, self.kind)

    def with_kind(self, kind):
        return VortexConfiguration(self.positions, self.circulations, kind)

    def appended(self, positions, circulations=None):
        """Configuration with extra particles (zero circulation by default)."""
        positions = np.asarray(positions, dtype=np.float64).reshape(-1, 2)
        if circulations is None:
            circulations = np.zeros(positions.shape[0])
        return VortexConfiguration(
            np.vstack([self.positions, positions]),
            np.concatenate([self.circulations, np.asarray(circulations, float)]),
            self.kind,
        )

    # JSON form: {"alpha": a, "kernel": "...", "particles": [[x, y, gamma], ...]}
    def to_dict(self):
        return {
            "alpha": self.kind.alpha,
            "kernel": self.kind.variant,
            "particles": [
                [float(p[0]), float(p[1]), float(g)]
                for p, g in zip(self.positions, self.circulations)
            ],
        }

    @classmethod
    def from_dict(cls, data):
        variant = data.get("kernel", BESSEL_BLOB)
        alpha = data.get("alpha")
        kind = KernelKind(variant, None if variant == EULER_POINT else alpha)
        rows = np.asarray(data["particles"], dtype=np.float64)
        if rows.ndim != 2 or rows.shape[1] != 3:
            raise ValueError("particles must be a list of [x, y, gamma] triples")
        return cls(rows[:, :2], rows[:, 2], kind)

    @classmethod
    def from_rows(cls, rows, kind):
        rows = np.asarray(rows, dtype=np.float64).reshape(-1, 3)
        return cls(rows[:, :2], rows[:, 2], kind)


@dataclass(frozen=True)
class InvariantSnapshot:
    circulation: float
    linear_impulse: tuple
    angular_impulse: float
    interaction_energy: float
    min_separation: float

    def as_row(self):
        return (
            self.circulation,
            self.linear_impulse[0],
            self.linear_impulse[1],
            self.angular_impulse,
            self.interaction_energy,
            self.min_separation,
        )


def _raise_collision(hit, time=None):
    i = int(np.flatnonzero(hit >= 0)[0])
    j = int(hit[i])
    where = "" if time is None else f" at t = {time!r}"
    raise SingularityError(
        f"point-vortex singularity: particles {i} and {j} coincide{where}",
        indices=(i, j),
        time=time,
    )


def induced_velocity(config: VortexConfiguration, points):
    """u(p) = sum_i G_i K(p, x_i) at each query point."""
    pts = np.ascontiguousarray(np.asarray(points, dtype=np.float64).reshape(-1, 2))
    vel, hit = pair_velocity(
        pts, config.positions, config.circulations, config.kind.alpha_or_zero, False
    )
    if np.any(hit >= 0):
        i = int(np.flatnonzero(hit >= 0)[0])
        raise SingularityError(
            f"query point {i} coincides with vortex {int(hit[i])}",
            indices=(i, int(hit[i])),
        )
    return vel


def min_pairwise_distance(config: VortexConfiguration):
    """Exact minimum distance over distinct particle pairs."""
    if config.n < 2:
        raise ValueError("min_pairwise_distance needs at least two particles")
    if config.n <= 64:
        d = config.positions[:, None, :] - config.positions[None, :, :]
        r = np.hypot(d[..., 0], d[..., 1])
        r[np.diag_indices(config.n)] = np.inf
        return float(r.min())
    dist, _ = cKDTree(config.positions).query(config.positions, k=2)
    return float(dist[:, 1].min())


def invariants(config: VortexConfiguration) -> InvariantSnapshot:
    g = config.circulations
    x = config.positions
    impulse = (g[:, None] * x).sum(axis=0)
    energy = pair_energy(x, g, config.kind.alpha_or_zero)
    return InvariantSnapshot(
        circulation=float(g.sum()),
        linear_impulse=(float(impulse[0]), float(impulse[1])),
        angular_impulse=float((g * (x * x).sum(axis=1)).sum()),
        interaction_energy=float(energy),
        min_separation=math.inf if config.n < 2 else min_pairwise_distance(config),
    )
