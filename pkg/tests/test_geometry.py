import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from zorich_lab.errors import DomainError
from zorich_lab.geometry import (
    MapParams,
    estimate_bilipschitz,
    estimate_face_angle,
    estimate_min_norm,
    face_pyramid_eval,
    face_sphere_eval,
    face_sphere_invert,
    fold_coordinate,
    fold_plane,
    generalized_face,
    get_face,
    seam_distance,
)

coord = st.floats(-1e4, 1e4, allow_nan=False)
lams = st.sampled_from([0.5, 1.0, 2.0, 8.0, 130.0])
unit_sq = st.tuples(st.floats(-1, 1), st.floats(-1, 1))


def test_fold_examples():
    assert fold_coordinate(5.0, 2.0) == (-1.0, 1)
    assert fold_coordinate(0.5, 2.0) == (0.5, 0)
    # a point on a reflection line belongs to the lower cell
    assert fold_coordinate(2.0, 2.0) == (2.0, 0)
    assert fold_coordinate(-2.0, 2.0) == (-2.0, 1)


def test_fold_rejects_bad_input():
    with pytest.raises(DomainError):
        fold_coordinate(math.inf, 1.0)
    with pytest.raises(DomainError):
        fold_coordinate(0.0, -1.0)


@given(coord, lams)
def test_fold_range_and_period(t, lam):
    f, k = fold_coordinate(t, lam)
    assert -lam <= f <= lam
    g, m = fold_coordinate(t + 4 * lam, lam)
    assert abs(f - g) <= 1e-9 * max(1.0, abs(t))
    assert (k - m) % 2 == 0


@given(coord, lams)
def test_fold_is_a_reflection_chain(t, lam):
    # the folded value differs from t by a multiple of 2*lam up to sign
    f, k = fold_coordinate(t, lam)
    r = (t - f) / (2 * lam) if k % 2 == 0 else (t + f) / (2 * lam)
    assert abs(r - round(r)) < 1e-9 * max(1.0, abs(t) / lam)


@given(unit_sq, lams)
def test_sphere_roundtrip_and_norm(v, lam):
    u = lam * np.array(v)
    s = face_sphere_eval(u, lam)
    assert abs(np.linalg.norm(s) - lam) <= 1e-12 * lam
    assert s[2] >= 0
    assert np.allclose(face_sphere_invert(s, lam), u, atol=1e-9 * lam)


@given(unit_sq)
def test_pyramid_roundtrip(v):
    face = get_face("pyramid")
    u = 2.0 * np.array(v)
    w = face.eval(u, 2.0)
    assert np.allclose(face.invert(w, 2.0), u, atol=1e-9)


@given(unit_sq)
def test_face_symmetries(v):
    for kind in ("sphere", "pyramid"):
        face = get_face(kind)
        u = np.array(v)
        h = face.eval(u, 1.0)
        hs = face.eval(u[::-1], 1.0)
        assert np.allclose(hs, [h[1], h[0], h[2]], atol=1e-14)
        hm = face.eval(np.array([-u[0], u[1]]), 1.0)
        assert np.allclose(hm, [-h[0], h[1], h[2]], atol=1e-14)


def test_face_boundary_goes_to_equator():
    t = np.linspace(-1, 1, 41)
    edge = np.column_stack([np.ones_like(t), t])
    assert np.allclose(face_sphere_eval(edge, 1.0)[:, 2], 0.0, atol=1e-15)
    assert np.allclose(face_pyramid_eval(edge, 1.0)[:, 2], 0.0, atol=1e-15)


def test_sphere_lipschitz_constants():
    # the lower ratio is attained along the boundary near a corner, where it tends to sqrt(2 - sqrt 2)/2
    upper, lower = estimate_bilipschitz(get_face("sphere"), 200_000, seed=3)
    assert upper == pytest.approx(2.0, abs=1e-3)
    assert lower == pytest.approx(math.sqrt(2 - math.sqrt(2)) / 2, abs=1e-3)


def test_pyramid_lipschitz_constants():
    # |h(u) - h(v)|^2 = |u - v|^2 + (max|u| - max|v|)^2 lies in [|u-v|^2, 2|u-v|^2]
    upper, lower = estimate_bilipschitz(get_face("pyramid"), 200_000, seed=3)
    assert upper == pytest.approx(math.sqrt(2), abs=1e-3)
    assert lower == pytest.approx(1.0, abs=1e-6)


def test_min_norms_and_angles():
    assert estimate_min_norm(get_face("sphere")) == pytest.approx(1.0, abs=1e-12)
    assert estimate_min_norm(get_face("pyramid")) == pytest.approx(1 / math.sqrt(2), abs=1e-12)
    # the pyramid's position vector meets a face at least at angle pi/6 (at the corners)
    # sampling estimates an infimum, so it can only overshoot
    theta = estimate_face_angle(get_face("pyramid"), 50_000, 0)
    assert math.pi / 6 - 1e-9 <= theta <= math.pi / 6 + 0.02
    assert estimate_face_angle(get_face("sphere"), 50_000, 0) > 1.5


def test_generalized_face_matches_pyramid():
    face = generalized_face(get_face("pyramid").unit)
    rng = np.random.default_rng(0)
    u = 2 * rng.random((50, 2)) - 1
    w = face.eval(u, 1.0)
    assert np.allclose(face.invert(w, 1.0), u, atol=1e-8)


def test_seam_distance():
    assert seam_distance(np.array([0.5, 0.0]), 2.0) == pytest.approx(0.5 / math.sqrt(2))
    assert seam_distance(np.array([2.0, 0.3]), 2.0) == pytest.approx(0.0)
    u, parity = fold_plane(np.array([3.0, 0.5]), 2.0)
    assert np.allclose(u, [1.0, 0.5]) and parity == 1


def test_params_validation():
    with pytest.raises(DomainError):
        MapParams(-1.0, 1.0)
    with pytest.raises(DomainError):
        MapParams(1.0, 0.0)
    p = MapParams(2, 0.5)
    assert p.kappa == pytest.approx(1.0)
    assert p.as_dict() == {"lambda": 2.0, "nu": 0.5, "face": "sphere"}
