import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from zorich_lab.errors import DomainError
from zorich_lab.geometry import MapParams
from zorich_lab.planar import (
    SQRT2,
    area_growth_experiment,
    curve_residual,
    curves_intersect,
    g_eval,
    gamma_m_curve,
    phi_inverse,
    planar_area_A0,
    planar_area_A0_bound,
    planar_area_Am,
    planar_det_bound,
    planar_det_fd,
    strip_area_between,
    strip_seam_distance,
    to_plane_coordinate,
)
from zorich_lab.zorich import zorich_eval

P = MapParams(2.0, 1.0)


@given(st.floats(-10, 10), st.floats(-2, 1), st.sampled_from(["diag", "anti"]))
def test_conjugacy(t, h, plane):
    x = np.array([t, t if plane == "diag" else -t, h])
    lhs = to_plane_coordinate(P, zorich_eval(P, x), plane)
    rhs = g_eval(P, to_plane_coordinate(P, x, plane))
    assert abs(lhs - rhs) <= 1e-12 * max(1.0, abs(rhs))


def test_phi_roundtrip():
    z = 0.3 + 1.1j
    assert to_plane_coordinate(P, phi_inverse(z, P.lam), "diag") == pytest.approx(z)
    assert to_plane_coordinate(P, phi_inverse(z, P.lam, "anti"), "anti") == pytest.approx(z)


def test_strip_area_formula():
    assert planar_area_Am(2.0, 1) == pytest.approx(SQRT2 * math.log(2), rel=1e-15)
    for m in (1, 2, 3):
        quad = strip_area_between(P, m)
        assert quad == pytest.approx(planar_area_Am(P.lam, m), rel=0.01)
    with pytest.raises(DomainError):
        planar_area_Am(2.0, 0)


def test_curves_are_disjoint_and_simple():
    curves = [gamma_m_curve(P, m, 300) for m in (1, 2, 3)]
    for m, c in enumerate(curves, start=1):
        assert curve_residual(P, m, c) < 1e-12
        assert not curves_intersect(c)
    assert not curves_intersect(curves[0], curves[1])
    # later curves lie to the right
    assert np.all(curves[1][:, 0] > curves[0][:, 0])


def test_planar_det_bound_holds():
    rng = np.random.default_rng(5)
    for _ in range(500):
        z = complex(rng.uniform(-1, 1), rng.uniform(-6, 6))
        if strip_seam_distance(z.imag) <= 1e-4:
            continue
        det = planar_det_fd(P, z)
        assert det.log_abs_det >= math.log(planar_det_bound(P, z.real)) + math.log1p(-1e-3)


def test_a0_area_bounded():
    a0 = planar_area_A0(P, 1e-10)
    assert 0 < a0 < planar_area_A0_bound(P)
    # the integral converges as the cutoff shrinks
    assert abs(planar_area_A0(P, 1e-12) - a0) < 1e-8


def test_area_growth():
    rep = area_growth_experiment(MapParams(2.0, 2.0), (0.0, 0.05, 0.5, 0.55), 4, cells=24)
    assert rep.ratios, "at least one step before contact"
    assert all(r >= rep.ratio_bound for r in rep.ratios)
    assert rep.contact_step is not None
