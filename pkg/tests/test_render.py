import json

import numpy as np
import pytest

from zorich_lab import kernels
from zorich_lab.errors import ConfigError
from zorich_lab.geometry import MapParams
from zorich_lab.render import (
    SliceSpec,
    colorize,
    palette,
    read_ppm,
    render_slice,
    resolve_threads,
    slice_from_config,
    write_raster,
)
from zorich_lab.symbolic import classify_point

P = MapParams(2.0, 1.0)
CODES = {"Escaping": kernels.ESCAPING, "Bounded": kernels.BOUNDED, "Undecided": kernels.UNDECIDED}


def _spec(plane="x3=const", offset=0.5, res=(96, 80), window=(-3, 3, -3, 3), horizon=32):
    return SliceSpec.named(plane, offset, window=window, resolution=res, horizon=horizon)


def test_deterministic_across_workers():
    spec = _spec(res=(150, 130))
    base = render_slice(P, spec, 1).tobytes()
    for threads in (2, 3, 8):
        assert render_slice(P, spec, threads).tobytes() == base


def test_pixels_match_classify_point():
    spec = _spec(res=(70, 66))
    raster = render_slice(P, spec, 2)
    rng = np.random.default_rng(0)
    for i, j in rng.integers(0, 66, (40, 2)):
        c = classify_point(P, spec.pixel_point(i, j), spec.horizon, spec.escape_radius)
        assert raster.verdict[i, j] == CODES[c.verdict]
        assert raster.step[i, j] == c.step
    one = SliceSpec.named("x1=x2", 0.0, window=(-1, 3, -2, 2), resolution=(1, 1))
    r = render_slice(P, one, 1)
    c = classify_point(P, (1 / np.sqrt(2), 1 / np.sqrt(2), 0.0))
    assert r.verdict[0, 0] == CODES[c.verdict]


def test_swap_symmetry_gives_transposed_raster():
    spec = _spec(res=(64, 64), window=(-2.5, 2.5, -2.5, 2.5), offset=-0.3)
    r = render_slice(MapParams(2.0, 0.4), spec, 2)
    assert np.array_equal(r.verdict, r.verdict.T)
    assert np.array_equal(r.step, r.step.T)


def test_positive_axis_never_bounded():
    spec = _spec("x1=x2", 0.0, res=(64, 64), window=(-1, 1, 0.05, 4))
    r = render_slice(P, spec, 1)
    assert not np.any(r.verdict[:, 31:33] == kernels.BOUNDED)


def test_invalid_frames():
    with pytest.raises(ConfigError):
        SliceSpec((0, 0, 0), (1, 0, 0), (1, 1e-6, 0), (-1, 1, -1, 1), (4, 4))
    with pytest.raises(ConfigError):
        SliceSpec.named("x4=const", 0.0, window=(-1, 1, -1, 1), resolution=(4, 4))
    with pytest.raises(ConfigError):
        _spec(res=(0, 4))
    with pytest.raises(ConfigError):
        slice_from_config({"plane": "affine", "window": [-1, 1, -1, 1], "resolution": [4, 4]}, 8, 1e10)


def test_thread_resolution(monkeypatch):
    monkeypatch.setenv("ZORICH_LAB_THREADS", "3")
    assert resolve_threads() == 3
    assert resolve_threads(5) == 5
    monkeypatch.setenv("ZORICH_LAB_THREADS", "x")
    with pytest.raises(ConfigError):
        resolve_threads()


def test_outputs(tmp_path):
    spec = _spec(res=(40, 30))
    r = render_slice(MapParams(2.0, 0.4), spec, 2)
    side = write_raster(tmp_path, r, P, png=True)
    rgb = read_ppm(tmp_path / "slice.ppm")
    assert rgb.shape == (30, 40, 3)
    assert np.array_equal(rgb, colorize(r))
    assert (tmp_path / "slice.png").exists()
    v = np.fromfile(tmp_path / "slice.verdict.raw", dtype="<i1").reshape(30, 40)
    h = np.fromfile(tmp_path / "slice.height.raw", dtype="<f8").reshape(30, 40)
    assert np.array_equal(v, r.verdict) and np.array_equal(h, r.height)
    meta = json.loads((tmp_path / "slice.json").read_text())
    assert meta["shape"] == [30, 40] and sum(meta["counts"].values()) == 1200
    white = rgb[r.verdict == kernels.BOUNDED]
    black = rgb[r.verdict == kernels.UNDECIDED]
    assert np.all(white == 255) and np.all(black == 0)


def test_palette_is_fixed():
    lut = palette()
    assert lut.shape == (32, 3)
    assert tuple(lut[0]) == (255, 64, 64)
    # escaping colors never coincide with the bounded or undecided colors
    assert not np.any(np.all(lut == 255, axis=1)) and not np.any(np.all(lut == 0, axis=1))
