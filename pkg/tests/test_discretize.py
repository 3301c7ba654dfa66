import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from oracles import bessel_k, ring_kernel_closed_form
from vortexblob.analysis.convergence import log_slope
from vortexblob.discretize import (
    GENERAL,
    ScalarVorticityField,
    bump,
    field_from_preset,
    grid_approximation,
    radial_alpha_velocity,
    radial_euler_velocity,
    rankine,
    ring_kernel,
    ring_radial_component,
)
from vortexblob.kernel import KernelKind

BLOB = KernelKind.blob(0.1)


def general(profile, box):
    return ScalarVorticityField(GENERAL, profile, box=box)


def test_presets_parse():
    f = field_from_preset("rankine(2, 3)")
    assert f.radius == 2.0 and f.linf_norm() == 3.0
    assert field_from_preset(" bump( 1.5 ) ").radius == 1.5
    assert field_from_preset("rankine()").radius == 1.0
    for bad in ("vortex(1)", "rankine(x)", "rankine(-1, 1)", "rankine(1, 2, 3)", "rankine 1"):
        with pytest.raises(ValueError):
            field_from_preset(bad)


def test_field_validation():
    with pytest.raises(ValueError):
        ScalarVorticityField("radial", lambda r: r, radius=0.0)
    with pytest.raises(ValueError):
        ScalarVorticityField(GENERAL, lambda x, y: x)
    with pytest.raises(ValueError):
        ScalarVorticityField(GENERAL, lambda x, y: x, box=(1, 0, 0, 1))
    with pytest.raises(ValueError):
        ScalarVorticityField("spiral", lambda r: r, radius=1.0)


def test_single_cell_constant_field():
    h = 0.3
    f = general(lambda x, y: np.ones_like(x), (0.0, h, 0.0, h))
    cfg = grid_approximation(f, h, BLOB)
    assert cfg.n == 1
    assert cfg.circulations[0] == pytest.approx(h * h, rel=1e-14)
    np.testing.assert_allclose(cfg.positions[0], [h / 2, h / 2], rtol=1e-15)


def test_cell_quadrature_is_exact_for_quintics():
    f = general(lambda x, y: x ** 5 * y ** 4 + 1.0, (0.0, 1.0, 0.0, 1.0))
    cfg = grid_approximation(f, 0.25, BLOB)
    assert cfg.circulations.sum() == pytest.approx(1.0 / 30.0 + 1.0, rel=1e-13)


@pytest.mark.parametrize("make", [rankine, bump])
def test_total_variation_tends_to_l1(make):
    f = make(1.0, 2.0)
    l1 = f.l1_norm()
    errs = [abs(grid_approximation(f, h, BLOB).total_variation - l1) for h in (0.1, 0.05, 0.025)]
    assert errs[-1] <= 1e-3 * l1
    assert errs[0] > errs[-1]


def test_moment_consistency():
    f = general(lambda x, y: np.exp(-(x * x + y * y)), (-6.0, 6.0, -6.0, 6.0))
    cfg = grid_approximation(f, 0.1, BLOB)
    g, x = cfg.circulations, cfg.positions
    assert g.sum() == pytest.approx(math.pi, rel=1e-10)
    assert abs((g[:, None] * x).sum(axis=0)).max() <= 1e-12
    # int |x|^2 e^{-|x|^2} = pi; cell centres miss int |x - c|^2 w = pi h^2/6 and
    # the first-moment term (h^2/6) int x . grad w = -pi h^2/3
    assert (g * (x * x).sum(axis=1)).sum() == pytest.approx(math.pi * (1 + 0.01 / 6), rel=1e-6)


def test_empty_support_raises():
    with pytest.raises(ValueError):
        grid_approximation(general(lambda x, y: np.zeros_like(x), (0, 1, 0, 1)), 0.1, BLOB)
    with pytest.raises(ValueError):
        grid_approximation(rankine(), 0.0, BLOB)


@given(st.floats(-3, 3), st.floats(-3, 3))
def test_translation_commutes_with_discretization(sx, sy):
    prof = lambda x, y: np.exp(-4 * (x * x + y * y))  # noqa: E731
    base = grid_approximation(general(prof, (-1.0, 1.0, -1.0, 1.0)), 0.2, BLOB)
    moved = grid_approximation(
        general(lambda x, y: prof(x - sx, y - sy), (sx - 1.0, sx + 1.0, sy - 1.0, sy + 1.0)),
        0.2, BLOB)
    np.testing.assert_allclose(moved.positions, base.positions + [sx, sy], rtol=0, atol=1e-12)
    np.testing.assert_allclose(moved.circulations, base.circulations, rtol=1e-12, atol=1e-15)


def test_rankine_euler_velocity():
    f = rankine(1.0, 1.0)
    np.testing.assert_allclose(radial_euler_velocity(f, [0.25, 0.5, 1.0]), [0.125, 0.25, 0.5],
                               rtol=1e-15)
    assert radial_euler_velocity(f, 2.0) == pytest.approx(0.25, rel=1e-15)
    with pytest.raises(ValueError):
        radial_euler_velocity(f, 0.0)


def test_enclosed_quadrature_matches_closed_form():
    f = bump(1.0, 1.0)
    no_closed = ScalarVorticityField("radial", f.profile, radius=1.0)
    r = np.array([0.2, 0.7, 1.0, 3.0])
    np.testing.assert_allclose(radial_euler_velocity(no_closed, r), radial_euler_velocity(f, r),
                               rtol=1e-12)


@pytest.mark.parametrize("r, s", [(0.5, 1.0), (1.0, 0.5), (0.01, 0.3), (2.0, 1.9), (1.0, 1.0)])
def test_ring_kernel_closed_form(r, s):
    want = ring_kernel_closed_form(r, s, 0.1)
    tol = 1e-9 if r == s else 1e-13
    assert ring_kernel(r, s, 0.1) == pytest.approx(want, rel=tol, abs=tol)
    assert abs(ring_radial_component(r, s, 0.1)) <= 1e-14


def test_alpha_velocity_tends_to_euler():
    f = rankine(1.0, 1.0)
    errs = [abs(radial_alpha_velocity(f, 0.5, a) - 0.25) for a in (0.2, 0.1, 0.05)]
    assert errs[0] > errs[1] > errs[2]
    assert errs[-1] <= 1e-5


def test_alpha_velocity_edge_error():
    # at the jump of a Rankine vortex the blob speed is lower by about alpha/2
    f = rankine(1.0, 1.0)
    alphas = [0.1, 0.05, 0.025]
    errs = [radial_alpha_velocity(f, 1.0, a) - 0.5 for a in alphas]
    assert all(e < 0 for e in errs)
    assert log_slope(alphas, np.abs(errs)) >= 0.9
    assert errs[-1] == pytest.approx(-alphas[-1] / 2, rel=0.05)


def test_narrow_patch_acts_as_point_blob():
    eps, gamma, alpha, r = 1e-3, 1.3, 0.2, 0.5
    f = rankine(eps, gamma / (math.pi * eps * eps))
    g = (1 / r - bessel_k(r / alpha)[1] / alpha) / (2 * math.pi)
    assert radial_alpha_velocity(f, r, alpha) == pytest.approx(gamma * g, rel=1e-5)
