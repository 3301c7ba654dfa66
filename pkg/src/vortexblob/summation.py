"""Compiled O(N*M) pair sums.

Every target is handled by one loop iteration and its inner sum runs over
sources in index order, so results do not depend on the worker count.
"""

import numba
import numpy as np

from .kernel import factor_scalar, green_scalar


@numba.njit(parallel=True, cache=True)
def pair_velocity(targets, sources, gammas, alpha, same):
    """Velocity at ``targets`` induced by ``sources``.

    ``alpha == 0`` selects the point-vortex kernel.  With ``same`` the two
    point sets are identical and the i == j term is skipped.  Returns the
    velocities and, per target, the index of a coincident source of nonzero
    circulation under the point kernel (-1 if none).
    """
    m = targets.shape[0]
    n = sources.shape[0]
    out = np.zeros((m, 2))
    hit = np.full(m, -1, dtype=np.int64)
    for i in numba.prange(m):
        xi = targets[i, 0]
        yi = targets[i, 1]
        u = 0.0
        v = 0.0
        for j in range(n):
            gj = gammas[j]
            if gj == 0.0 or (same and i == j):
                continue
            dx = xi - sources[j, 0]
            dy = yi - sources[j, 1]
            r = np.hypot(dx, dy)
            if r == 0.0:
                if alpha == 0.0:
                    hit[i] = j
                continue
            f = gj * factor_scalar(r, alpha)
            u -= f * dy
            v += f * dx
        out[i, 0] = u
        out[i, 1] = v
    return out, hit


@numba.njit(cache=True)
def pair_energy(pos, gammas, alpha):
    """(1/2) sum_{i != j} G_i G_j G(|x_i - x_j|), summed once per pair."""
    n = pos.shape[0]
    total = 0.0
    for i in range(n):
        if gammas[i] == 0.0:
            continue
        acc = 0.0
        for j in range(i + 1, n):
            if gammas[j] == 0.0:
                continue
            r = np.hypot(pos[i, 0] - pos[j, 0], pos[i, 1] - pos[j, 1])
            if r == 0.0 and alpha == 0.0:
                return -np.inf
            acc += gammas[j] * green_scalar(r, alpha)
        total += gammas[i] * acc
    return total
