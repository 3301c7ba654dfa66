"""Vortex-blob (Euler-alpha) particle simulation and verification tools."""

import numba as _numba

# prefer OpenMP / workqueue over TBB, which is usually absent
_numba.config.THREADING_LAYER_PRIORITY = ["omp", "workqueue", "tbb"]

__version__ = "0.1.0"

from .kernel import KernelKind, SingularityError  # noqa: E402
from .vortex_system import VortexConfiguration, invariants  # noqa: E402
from .dynamics import Trajectory, integrate, picard_flow, rhs_direct, rhs_fast  # noqa: E402

__all__ = [
    "KernelKind",
    "SingularityError",
    "VortexConfiguration",
    "invariants",
    "Trajectory",
    "integrate",
    "picard_flow",
    "rhs_direct",
    "rhs_fast",
    "__version__",
]
