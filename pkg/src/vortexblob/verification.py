"""Verification suites: each check returns named pass/fail results.

The references here are independent of the fast paths where possible
(scipy's Bessel routines, adaptive quadrature, closed-form motions).
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass

import numpy as np
from scipy import integrate as quadrature
from scipy import special

from . import specfun
from .analysis import (
    BumpTest,
    GaussianProfile,
    GaussianTest,
    collapse_experiment,
    picard_contraction_report,
    quasi_lipschitz_ratio,
    reversal_check,
    scaling_identity_residual,
    uniform_weak_convergence_check,
    weak_coadjoint_residual,
)
from .discretize import rankine
from .dynamics import integrate, rhs_direct, rhs_fast
from .kernel import KernelKind, blob_vorticity, tangential_speed
from .vortex_system import VortexConfiguration


@dataclass
class CheckResult:
    criterion: int
    name: str
    value: float
    threshold: str
    passed: bool
    detail: str = ""

    def line(self):
        mark = "PASS" if self.passed else "FAIL"
        return f"[{mark}] criterion {self.criterion}: {self.name} = {self.value:.6g} ({self.threshold}) {self.detail}".rstrip()


def equal_pair(alpha=0.5, d=1.0, gamma=1.0):
    return VortexConfiguration([[-0.5 * d, 0.0], [0.5 * d, 0.0]], [gamma, gamma],
                               KernelKind.blob(alpha))


def dipole(alpha=0.5, d=1.0, gamma=1.0):
    return VortexConfiguration([[-0.5 * d, 0.0], [0.5 * d, 0.0]], [gamma, -gamma],
                               KernelKind.blob(alpha))


def _ratios(errs):
    return [a / b if b > 0 else math.inf for a, b in zip(errs, errs[1:])]


# ---------------------------------------------------------------- kernels

def check_bessel(n=10_000):
    t0 = time.perf_counter()
    x = np.geomspace(1e-6, 700.0, n)
    ref0, ref1 = special.k0(x), special.k1(x)
    e0 = np.abs(specfun.bessel_k0(x) / ref0 - 1).max()
    e1 = np.abs(specfun.bessel_k1(x) / ref1 - 1).max()
    xs = np.geomspace(1e-2, 30.0, 40)
    errs = []
    for step in (1e-2, 5e-3):
        h = step * xs
        d = (specfun.bessel_k0(xs + h) - specfun.bessel_k0(xs - h)) / (2 * h)
        errs.append(np.abs(d + specfun.bessel_k1(xs)) / specfun.bessel_k1(xs))
    order_ratio = float(np.median(errs[0] / errs[1]))
    elapsed = time.perf_counter() - t0
    worst = float(max(e0, e1))
    return [
        CheckResult(1, "bessel max relative error", worst, "<= 1e-10, < 10 s",
                    worst <= 1e-10 and elapsed < 10, f"[{elapsed:.2f} s]"),
        CheckResult(1, "K0' + K1 difference ratio under step halving", order_ratio,
                    "in [3.5, 4.5]", 3.5 <= order_ratio <= 4.5),
    ]


def check_kernel_consistency(n=100, seed=0):
    t0 = time.perf_counter()
    rng = np.random.default_rng(seed)
    alpha = np.exp(rng.uniform(math.log(0.05), math.log(5.0), n))
    r = alpha * np.exp(rng.uniform(math.log(1e-3), math.log(20.0), n))
    worst = 0.0
    for ri, a in zip(r, alpha):
        val, _ = quadrature.quad(lambda s: float(blob_vorticity(s, a)) * s, 0.0, ri,
                                 limit=200, epsabs=0.0, epsrel=1e-13)
        lhs = val / ri
        rhs = float(tangential_speed(ri, a))
        worst = max(worst, abs(lhs - rhs) / abs(rhs))
    elapsed = time.perf_counter() - t0
    return [CheckResult(2, "enclosed blob vorticity vs tangential speed", worst,
                        "<= 1e-8 relative, < 30 s", worst <= 1e-8 and elapsed < 30,
                        f"[{elapsed:.2f} s]")]


def check_scaling(n=10_000, seed=0):
    res = scaling_identity_residual(n, seed)
    return [CheckResult(3, "scaling identity residual", res, "<= 1e-12", res <= 1e-12)]


def suite_kernels():
    return check_bessel() + check_kernel_consistency() + check_scaling()


# ---------------------------------------------------------------- quasi-Lipschitz

def suite_quasi_lipschitz(seed=0):
    base = quasi_lipschitz_ratio(KernelKind.blob(1.0), 10_000, seed)
    fine = quasi_lipschitz_ratio(KernelKind.blob(1.0), 100_000, seed)
    change = abs(fine - base) / fine
    vals = [quasi_lipschitz_ratio(KernelKind.blob(a), 100_000, seed) for a in (0.1, 1.0, 10.0)]
    spread = (max(vals) - min(vals)) / min(vals)
    return [
        CheckResult(4, "quasi-Lipschitz constant (1e5 samples)", fine, "finite",
                    math.isfinite(fine) and fine > 0),
        CheckResult(4, "change under 10x sample refinement", change, "< 5%", change < 0.05),
        CheckResult(4, "spread across alpha in {0.1, 1, 10}", spread, "< 1%", spread < 0.01),
    ]


# ---------------------------------------------------------------- dynamics

def pair_period(alpha=0.5, d=1.0, gamma=1.0):
    omega = 2.0 * gamma * float(tangential_speed(d, alpha)) / d
    return 2.0 * math.pi / omega


def check_two_body():
    t0 = time.perf_counter()
    cfg = equal_pair()
    period = pair_period()
    errs = []
    steps = (25, 50, 100)
    for m in steps:
        final = integrate(cfg, period, period / m, 1 << 30, snapshots=False).final
        d = final.positions - cfg.positions
        errs.append(float(np.hypot(d[:, 0], d[:, 1]).max()))
    ratios = _ratios(errs)
    dip = dipole()
    speed = float(tangential_speed(1.0, 0.5))
    t_end = 2.0
    dt = t_end / steps[-1]
    final = integrate(dip, t_end, dt, 1 << 30, snapshots=False).final
    shift = float(np.sign(rhs_direct(dip)[0, 1]))
    exact = dip.positions + np.array([0.0, shift * speed * t_end])
    dip_err = float(np.abs(final.positions - exact).max())
    c_pair = errs[-1] / (period / steps[-1]) ** 4
    elapsed = time.perf_counter() - t0
    return [
        CheckResult(5, "equal-pair error ratio per dt halving", min(ratios),
                    "all in [12, 20], < 60 s",
                    all(12 <= q <= 20 for q in ratios) and elapsed < 60,
                    f"ratios {', '.join(f'{q:.2f}' for q in ratios)}"),
        CheckResult(5, "dipole translation error", dip_err, "<= C dt^4 (pair C)",
                    dip_err <= c_pair * dt ** 4, f"C = {c_pair:.3g}"),
    ]


def invariant_drifts(cfg, t_end, dt):
    tr = integrate(cfg, t_end, dt, 1)
    s0 = tr.snapshots[0]
    scale = cfg.total_variation * float(np.hypot(*cfg.positions.T).max())
    px = max(abs(s.linear_impulse[0] - s0.linear_impulse[0]) for s in tr.snapshots) / scale
    py = max(abs(s.linear_impulse[1] - s0.linear_impulse[1]) for s in tr.snapshots) / scale
    ai = max(abs(s.angular_impulse - s0.angular_impulse) for s in tr.snapshots) / abs(s0.angular_impulse)
    en = max(abs(s.interaction_energy - s0.interaction_energy)
             for s in tr.snapshots) / abs(s0.interaction_energy)
    circ = all(s.circulation == s0.circulation for s in tr.snapshots)
    return circ, {"Px": px, "Py": py, "I": ai, "H": en}


def check_conservation():
    cfg = equal_pair()
    circ, drift = invariant_drifts(cfg, 10.0, 1e-3)
    worst = max(drift.values())
    series = [invariant_drifts(cfg, 10.0, dt)[1] for dt in (0.2, 0.1, 0.05)]
    ratios = {k: _ratios([s[k] for s in series]) for k in ("I", "H")}
    flat = [q for v in ratios.values() for q in v]
    return [
        CheckResult(6, "circulation bit-exact", float(circ), "== 1", circ),
        CheckResult(6, "max relative invariant drift, T = 10, dt = 1e-3", worst, "<= 1e-8",
                    worst <= 1e-8),
        CheckResult(6, "invariant drift ratio per dt halving", min(flat), "all in [12, 20]",
                    all(12 <= q <= 20 for q in flat),
                    "I: " + ", ".join(f"{q:.2f}" for q in ratios["I"])
                    + "; H: " + ", ".join(f"{q:.2f}" for q in ratios["H"])),
    ]


def check_reversibility(dt=0.05):
    err, budget = reversal_check(equal_pair(), 5.0, dt)
    return [CheckResult(8, "reversal error of the pair, T = 5", err,
                        f"<= 2 x forward budget {budget:.3e}", err <= 2 * budget)]


def suite_dynamics():
    return check_two_body() + check_conservation() + check_reversibility()


# ---------------------------------------------------------------- Picard

def suite_picard():
    cfg = equal_pair()
    rep = picard_contraction_report(cfg, 0.5, 0.01)
    ref = integrate(cfg, 0.5, 0.01, 1, snapshots=False)
    gap = float(np.abs(rep.trajectory.positions - ref.positions).max())
    return [
        CheckResult(9, "final Picard distance", rep.distances[-1], "< 1e-10, monotone tail",
                    rep.converged and rep.monotone_tail, rep.message),
        CheckResult(9, "Picard vs direct RK4 sup gap", gap, "<= 1e-6", gap <= 1e-6),
    ]


# ---------------------------------------------------------------- co-adjoint

def suite_coadjoint():
    cfg = equal_pair()
    phi = GaussianTest(center=(0.3, 0.1), width=1.0)
    res = [weak_coadjoint_residual(integrate(cfg, 2.0, dt), phi) for dt in (0.1, 0.05, 0.025)]
    ratios = _ratios(res)
    single = VortexConfiguration([[0.0, 0.0]], [1.0], KernelKind.blob(0.5))
    static = weak_coadjoint_residual(integrate(single, 1.0, 0.1), phi)
    disjoint = weak_coadjoint_residual(integrate(cfg, 1.0, 0.1),
                                       BumpTest(center=(5.0, 5.0), radius=1.0))
    return [
        CheckResult(11, "co-adjoint residual ratio per dt halving", min(ratios),
                    "all in [12, 20]", all(12 <= q <= 20 for q in ratios),
                    ", ".join(f"{q:.2f}" for q in ratios)),
        CheckResult(11, "static / disjoint-support residual", max(static, disjoint),
                    "<= 1e-13", max(static, disjoint) <= 1e-13),
    ]


# ---------------------------------------------------------------- collapse

def suite_collapse(series=None):
    t0 = time.perf_counter()
    point = collapse_experiment("point")
    blob = collapse_experiment("blob", t_end=2.0 * point.t_star, config=point.config)
    elapsed = time.perf_counter() - t0
    if series is not None:
        series["collapse_point"] = point.min_distance
        series["collapse_blob"] = blob.min_distance
    return [
        CheckResult(7, "point collapse slope of log l_min vs log(t* - t)", point.slope,
                    "within 0.05 of 1/2", abs(point.slope - 0.5) <= 0.05,
                    f"t* = {point.t_star:.6g}, {point.halt_reason}"),
        CheckResult(7, "blob (alpha = 0.1) min distance / initial over [0, 2 t*]",
                    blob.floor_ratio, ">= 0.05, < 120 s",
                    blob.floor_ratio >= 0.05 and elapsed < 120,
                    f"floor {blob.floor:.6g} [{elapsed:.1f} s]"),
        CheckResult(8, "blob collapse run reversal error", blob.reversal_error,
                    "<= 1e-6 (cross-check)", blob.reversal_error <= 1e-6),
    ]


# ---------------------------------------------------------------- fast summation

def suite_fast(n=10_000, alpha=0.05, rel_tol=1e-6, seed=0):
    rng = np.random.default_rng(seed)
    r = np.sqrt(rng.uniform(0, 1, n))
    th = rng.uniform(0, 2 * np.pi, n)
    cfg = VortexConfiguration(np.c_[r * np.cos(th), r * np.sin(th)],
                              rng.uniform(-1, 1, n), KernelKind.blob(alpha))
    rhs_fast(VortexConfiguration(cfg.positions[:64], cfg.circulations[:64], cfg.kind),
             rel_tol)  # compile outside timing
    t0 = time.perf_counter()
    direct = rhs_direct(cfg)
    t_direct = time.perf_counter() - t0
    t0 = time.perf_counter()
    fast = rhs_fast(cfg, rel_tol)
    t_fast = time.perf_counter() - t0
    dev = float(np.hypot(*(fast - direct).T).max())
    bound = rel_tol * cfg.total_variation / (2 * np.pi * alpha)
    return [
        CheckResult(12, "fast vs direct max deviation", dev, f"<= {bound:.3e}", dev <= bound),
        CheckResult(12, "fast / direct wall time", t_fast / t_direct, "<= 0.2",
                    t_fast / t_direct <= 0.2, f"[{t_fast:.2f} s vs {t_direct:.2f} s]"),
    ]


# ---------------------------------------------------------------- uniformity

def suite_uniformity():
    errs = uniform_weak_convergence_check(rankine(1.0, 1.0), GaussianProfile(1.0),
                                          [0.2, 0.1, 0.05])
    ok = all(b < a for a, b in zip(errs, errs[1:]))
    return [CheckResult(13, "convolution sup error over h = 0.2, 0.1, 0.05", errs[-1],
                        "strictly decreasing", ok, ", ".join(f"{e:.3e}" for e in errs))]


SUITES = {
    "kernels": suite_kernels,
    "quasi-lipschitz": suite_quasi_lipschitz,
    "dynamics": suite_dynamics,
    "picard": suite_picard,
    "coadjoint": suite_coadjoint,
    "collapse": suite_collapse,
    "fast": suite_fast,
    "uniformity": suite_uniformity,
}
