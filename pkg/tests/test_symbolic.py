import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy import ndimage

from zorich_lab import kernels
from zorich_lab.branches import BeamIndex
from zorich_lab.errors import ConvergenceError, DomainError, InadmissibleError
from zorich_lab.geometry import MapParams
from zorich_lab.symbolic import (
    BOUNDED,
    ESCAPING,
    beam_index,
    beam_index_many,
    classify_point,
    classify_points,
    coarse_of_diamond,
    diamond_index,
    escaping_grid_components,
    gamma_k_curves,
    in_closed_B00,
    in_coarse_beam,
    itinerary,
    lambda_Z_approx,
    periodic_point,
    word_in_closed_beams,
)
from zorich_lab.zorich import _eval_unchecked, zorich_eval

LAM = 2.0
P = MapParams(LAM, 1.0)
PARABOLIC = MapParams(2.0, 1 / (2 * math.e))
coords = st.floats(-60, 60)
# dyadic coordinates keep x1 - x2, x1 + x2 and all translations exact, so the two
# membership descriptions are compared without rounding on the edges
dyadic = st.integers(-60 * 2**20, 60 * 2**20).map(lambda k: k / 2**20)
# points on the lattice of beam edges and corners exercise the boundary convention
lattice = st.integers(-12, 12).map(lambda k: k * LAM / 2)


def test_beam_index_examples():
    assert beam_index((0.0, 0.0, 5.0), LAM) == (0, 0)
    # the edge x1 = x2 - 2*lam belongs to T8_(0,0) for -2*lam < x1 <= 0
    assert beam_index((-LAM, LAM, 0.0), LAM) == (0, 0)
    assert beam_index((0.0, 2 * LAM, 0.0), LAM) == (0, 0)
    assert beam_index((2 * LAM, 0.0, 0.0), LAM) == (0, 1)


@given(st.one_of(dyadic, lattice), st.one_of(dyadic, lattice))
def test_beam_tiling(x1, x2):
    x = (x1, x2, 0.0)
    i, j = beam_index(x, LAM)
    hits = [(a, b) for a in range(i - 2, i + 3) for b in range(j - 2, j + 3) if in_coarse_beam(x, (a, b), LAM)]
    assert hits == [(i, j)]


@given(coords, coords, st.integers(-5, 5), st.integers(-5, 5))
def test_beam_translation(x1, x2, a, b):
    x = np.array([x1, x2, 0.0])
    i, j = beam_index(x, LAM)
    shifted = x + 2 * a * np.array([LAM, LAM, 0]) + 2 * b * np.array([LAM, -LAM, 0])
    # exact for dyadic shifts of these magnitudes unless x sits on an edge
    if in_coarse_beam(shifted, (i + a, j + b), LAM):
        assert beam_index(shifted, LAM) == (i + a, j + b)


def test_beam_index_vectorized():
    rng = np.random.default_rng(0)
    x = rng.uniform(-50, 50, (500, 3))
    many = beam_index_many(x, LAM)
    assert all(tuple(many[k]) == beam_index(x[k], LAM) for k in range(500))


@given(st.floats(0.01, 0.99), st.floats(0.01, 0.99), st.integers(-4, 4), st.integers(-4, 4))
def test_diamonds_refine_coarse_beams(a, b, i, j):
    d = 2 * LAM * (j + a)
    s = 2 * LAM * (i + b)
    x = ((s + d) / 2, (s - d) / 2, 0.0)
    assert diamond_index(x, LAM) == (i, j)
    assert beam_index(x, LAM) == coarse_of_diamond((i, j))


def test_itinerary_axis_and_overflow():
    it = itinerary(MapParams(1.0, 1 / math.e), (0.0, 0.0, 1.0), 10)
    assert it.symbols == ((0, 0),) * 10 and not it.truncated
    it = itinerary(P, (0.3, 0.1, 701.0), 5)
    assert len(it) == 1 and it.truncated
    with pytest.raises(DomainError):
        itinerary(P, (0, 0, 0), 0)


def test_itinerary_shift():
    rng = np.random.default_rng(7)
    for _ in range(1000):
        x = rng.uniform(-20, 20, 3) * np.array([1, 1, 0.2])
        h = int(rng.integers(2, 51))
        full = itinerary(P, x, h)
        later = itinerary(P, _eval_unchecked(P, x), h - 1)
        assert later.symbols == full.symbols[1 : 1 + len(later)]


def test_classify_axis_examples():
    assert classify_point(P, (0.0, 0.0, 1.0), 64, 1e10).verdict == ESCAPING
    fixed = classify_point(PARABOLIC, (0.0, 0.0, 1.0), 64, 1e10)
    assert fixed.verdict == BOUNDED and fixed.witness == pytest.approx(8.0)
    with pytest.raises(DomainError):
        classify_point(P, (0, 0, 0), 10, 1.0)


@pytest.mark.parametrize("params", [P, MapParams(1.0, 0.3)])
def test_deep_lower_point_follows_axis(params):
    # Z(0, 0, -100) is within nu*lam*exp(-100) of the origin, then follows the axis orbit of 0
    deep = classify_point(params, (0.0, 0.0, -100.0), 64, 1e10)
    axis = classify_point(params, (0.0, 0.0, 0.0), 63, 1e10)
    assert deep.verdict == axis.verdict
    if deep.verdict == ESCAPING:
        assert deep.step == axis.step + 1


def test_compiled_matches_numpy():
    rng = np.random.default_rng(3)
    x = rng.uniform(-6, 6, (4000, 3))
    for params in (P, PARABOLIC, MapParams(2.0, 1.0, "pyramid")):
        a = classify_points(params, x, 32, 1e10)
        b = classify_points(params, x, 32, 1e10, engine="numpy")
        assert np.array_equal(a[0], b[0])
        assert np.array_equal(a[1], b[1])


def test_periodic_parabolic():
    res = periodic_point(PARABOLIC, [(0, 0)], tol=1e-12)
    assert np.allclose(res.x_star, [0, 0, 1], atol=1e-4)
    assert res.residual < 1e-10


def test_periodic_regime_word(regime):
    word = [BeamIndex(-2, -2), BeamIndex(1, 1)]
    res = periodic_point(regime, word, tol=1e-12)
    assert res.residual < 10 * 1e-12 * max(1.0, np.abs(res.x_star).max())
    assert word_in_closed_beams(regime, res.x_star, word, repeats=3)
    assert itinerary(regime, res.x_star, 6, "diamond").symbols == tuple(word) * 3


def test_periodic_errors(regime):
    with pytest.raises(InadmissibleError) as info:
        periodic_point(regime, [(0, 0), (0, -1)])
    assert info.value.step == 0
    with pytest.raises(ConvergenceError) as info:
        periodic_point(regime, [(0, 0)], tol=1e-30, max_rounds=3)
    assert info.value.residual > 0


def test_gamma_curves():
    cs = gamma_k_curves(P, 6, 200)
    assert len(cs.curves) == 7 and cs.dropped == [0] * 7
    g1 = cs.curves[1]
    assert np.allclose(g1[:, :2], [2 * LAM, 0.0], atol=1e-9)
    for k, c in enumerate(cs.curves[1:], start=1):
        d = c[:, 0] - c[:, 1]
        s = c[:, 0] + c[:, 1]
        assert np.all((d >= -1e-9) & (d <= 2 * LAM + 1e-9) & (s >= -1e-9) & (s <= 2 * LAM + 1e-9))
        gaps = np.linalg.norm(np.diff(c, axis=0), axis=1)
        assert gaps.min() > 1e-12
        y = c
        for _ in range(k):
            y = zorich_eval(P, y)
        assert np.abs(y[:, :2]).max() < 1e-7 and np.all(y[:, 2] < 0)


def test_components_empty_and_labels():
    rep = escaping_grid_components(P, (-1, 1, -1, 1, -1, 1), 8, horizon=1, escape_radius=1e300)
    assert rep.count == 0 and rep.n_escaping == 0 and rep.dominant_fraction == 0.0
    rng = np.random.default_rng(0)
    mask = rng.random((20, 21, 22)) < 0.3
    labels = kernels.label_components_26(mask)
    ref, n = ndimage.label(mask, structure=np.ones((3, 3, 3)))
    assert len(np.unique(labels[mask])) == n
    # same partition: each reference component maps onto exactly one root
    for k in range(1, n + 1):
        assert len(np.unique(labels[ref == k])) == 1


def test_components_upper_half_space():
    rep = escaping_grid_components(MapParams(2.0, 2.0), (0.2, 1.2, 0.2, 1.2, 1.0, 3.0), 16, 32, 1e10)
    assert rep.n_escaping > 0
    assert rep.dominant_fraction > 0.9
    assert rep.to_record()["label"].startswith("observational")


def test_lambda_z_nesting():
    p = MapParams(2.0, 0.15)
    full = lambda_Z_approx(p, 0, 16, 16, (-3.0, 1.0), 16)
    assert len(full.points) == full.n_grid == 16**3
    h3 = lambda_Z_approx(p, 3, 16, 16, (-3.0, 1.0), 16)
    h4 = lambda_Z_approx(p, 4, 16, 16, (-3.0, 1.0), 16)
    s3 = {tuple(v) for v in h3.points}
    assert all(tuple(v) in s3 for v in h4.points)
    assert 0 < len(h4.points) <= len(h3.points)
    cur = h4.points
    for _ in range(4):
        cur = zorich_eval(p, cur)
        assert np.all(in_closed_B00(cur, p.lam, 1e-9 * p.lam))
