"""Tile-parallel escape-time rendering of planar slices, and raster output."""

from __future__ import annotations

import json
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import kernels
from .config import ESCAPE_RADIUS, HORIZON
from .errors import ConfigError
from .geometry import MapParams
from .symbolic import default_bound_radius

TILE = 64
PLANES = ("x1=x2", "x1=-x2", "x3=const", "x2=const", "x1=const", "affine")
_R = 1.0 / math.sqrt(2.0)


@dataclass(frozen=True)
class SliceSpec:
    """A rectangle of an affine plane sampled at pixel centers.

    Plane coordinates ``(a, b)`` map to ``origin + a*e1 + b*e2``. Column
    ``j`` has ``a = umin + (j + 1/2)*du``; row 0 is the top of the window,
    so row ``i`` has ``b = vmax - (i + 1/2)*dv``.
    """

    origin: tuple
    e1: tuple
    e2: tuple
    window: tuple  # (umin, umax, vmin, vmax)
    resolution: tuple  # (width, height)
    horizon: int = HORIZON
    escape_radius: float = ESCAPE_RADIUS
    bound_radius: float | None = None
    plane: str = "affine"

    def __post_init__(self):
        w, h = self.resolution
        if int(w) != w or int(h) != h or w < 1 or h < 1:
            raise ConfigError(f"resolution must be positive integers, got {self.resolution}")
        umin, umax, vmin, vmax = self.window
        if not (umax > umin and vmax > vmin):
            raise ConfigError(f"empty window {self.window}")
        if self.horizon < 1:
            raise ConfigError("horizon must be at least 1")
        e1 = np.asarray(self.e1, dtype=float)
        e2 = np.asarray(self.e2, dtype=float)
        if e1.shape != (3,) or e2.shape != (3,) or np.asarray(self.origin).shape != (3,):
            raise ConfigError("origin, e1 and e2 must be 3-vectors")
        gram = np.array([[e1 @ e1, e1 @ e2], [e2 @ e1, e2 @ e2]])
        if np.max(np.abs(gram - np.eye(2))) > 1e-12:
            raise ConfigError("spanning vectors must be orthonormal to 1e-12")

    @property
    def width(self) -> int:
        return int(self.resolution[0])

    @property
    def height(self) -> int:
        return int(self.resolution[1])

    def pixel_point(self, i: int, j: int) -> np.ndarray:
        """Point of space at the center of pixel (row ``i``, column ``j``)."""
        umin, umax, vmin, vmax = self.window
        du = (umax - umin) / self.width
        dv = (vmax - vmin) / self.height
        a = umin + (j + 0.5) * du
        b = vmax - (i + 0.5) * dv
        o, e1, e2 = (np.asarray(v, dtype=float) for v in (self.origin, self.e1, self.e2))
        return np.array([o[k] + a * e1[k] + b * e2[k] for k in range(3)])

    @classmethod
    def named(cls, plane: str, offset: float = 0.0, **kw) -> "SliceSpec":
        """Slice of a named plane; ``offset`` moves it along its unit normal."""
        frames = {
            "x1=x2": ((_R * offset, -_R * offset, 0.0), (_R, _R, 0.0), (0.0, 0.0, 1.0)),
            "x1=-x2": ((_R * offset, _R * offset, 0.0), (_R, -_R, 0.0), (0.0, 0.0, 1.0)),
            "x3=const": ((0.0, 0.0, offset), (1.0, 0.0, 0.0), (0.0, 1.0, 0.0)),
            "x2=const": ((0.0, offset, 0.0), (1.0, 0.0, 0.0), (0.0, 0.0, 1.0)),
            "x1=const": ((offset, 0.0, 0.0), (0.0, 1.0, 0.0), (0.0, 0.0, 1.0)),
        }
        if plane not in frames:
            raise ConfigError(f"unknown plane {plane!r}; expected one of {PLANES}")
        origin, e1, e2 = frames[plane]
        return cls(origin, e1, e2, plane=plane, **kw)


def slice_from_config(render_cfg: dict, horizon: int, escape_radius: float, bound_radius=None) -> SliceSpec:
    """Build a :class:`SliceSpec` from the ``render`` section of a configuration."""
    try:
        plane = render_cfg["plane"]
        common = dict(
            window=tuple(float(v) for v in render_cfg["window"]),
            resolution=tuple(int(v) for v in render_cfg["resolution"]),
            horizon=int(horizon),
            escape_radius=float(escape_radius),
            bound_radius=bound_radius,
        )
        if len(common["window"]) != 4 or len(common["resolution"]) != 2:
            raise ConfigError("window needs 4 numbers and resolution 2")
        if plane == "affine":
            vecs = [render_cfg.get(k) for k in ("origin", "e1", "e2")]
            if any(v is None for v in vecs):
                raise ConfigError("an affine plane needs origin, e1 and e2")
            return SliceSpec(*(tuple(float(c) for c in v) for v in vecs), plane="affine", **common)
        return SliceSpec.named(plane, float(render_cfg.get("offset", 0.0)), **common)
    except (KeyError, TypeError, ValueError) as exc:
        raise ConfigError(f"bad render section: {exc}") from exc


@dataclass
class RasterGrid:
    """Per-pixel verdict code, first-escape step (-1 if none) and final height."""

    verdict: np.ndarray
    step: np.ndarray
    height: np.ndarray
    spec: SliceSpec = field(repr=False)

    @property
    def shape(self) -> tuple:
        return self.verdict.shape

    def tobytes(self) -> bytes:
        return self.verdict.tobytes() + self.step.tobytes() + self.height.tobytes()


def resolve_threads(threads: int | None = None) -> int:
    """Worker count: explicit value, else ``ZORICH_LAB_THREADS``, else the CPU count."""
    if threads is None:
        env = os.environ.get("ZORICH_LAB_THREADS")
        if env:
            try:
                threads = int(env)
            except ValueError as exc:
                raise ConfigError(f"ZORICH_LAB_THREADS must be an integer, got {env!r}") from exc
        else:
            threads = os.cpu_count() or 1
    if threads < 1:
        raise ConfigError("thread count must be at least 1")
    return int(threads)


def _tiles(height: int, width: int, tile: int = TILE):
    for i0 in range(0, height, tile):
        for j0 in range(0, width, tile):
            yield i0, min(i0 + tile, height), j0, min(j0 + tile, width)


def render_slice(params: MapParams, spec: SliceSpec, threads: int | None = None) -> RasterGrid:
    """Classify every pixel center of the slice.

    Each 64x64 tile is written by exactly one worker, so the raster does not
    depend on the number of workers or on scheduling.
    """
    code = kernels.FACE_CODES.get(params.face.kind)
    if code is None:
        raise ConfigError("the renderer supports the built-in sphere and pyramid faces")
    threads = resolve_threads(threads)
    h, w = spec.height, spec.width
    verdict = np.empty((h, w), dtype=np.int8)
    step = np.empty((h, w), dtype=np.int32)
    height = np.empty((h, w), dtype=np.float64)
    umin, umax, vmin, vmax = spec.window
    du = (umax - umin) / w
    dv = (vmax - vmin) / h
    origin, e1, e2 = (np.asarray(v, dtype=float) for v in (spec.origin, spec.e1, spec.e2))
    box = default_bound_radius(params) if spec.bound_radius is None else float(spec.bound_radius)
    args = (params.lam, params.nu, code, spec.horizon, spec.escape_radius, params.guard, box, verdict, step, height)

    def work(tile):
        i0, i1, j0, j1 = tile
        kernels.render_tile(origin, e1, e2, umin, vmax, du, dv, i0, i1, j0, j1, *args)

    tiles = list(_tiles(h, w))
    if threads == 1:
        for t in tiles:
            work(t)
    else:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            list(pool.map(work, tiles))
    return RasterGrid(verdict, step, height, spec)


# ---------------------------------------------------------------------------
# colors and files


def palette(n: int = 32) -> np.ndarray:
    """Escape palette: ``round(255 * (1/2 + cos(2*pi*(k/n + phase))/2))`` with phases 0, 1/3, 2/3 for R, G, B."""
    k = np.arange(n)[:, None]
    phase = np.array([0.0, 1.0 / 3.0, 2.0 / 3.0])[None, :]
    return np.rint(255.0 * (0.5 + 0.5 * np.cos(2.0 * np.pi * (k / n + phase)))).astype(np.uint8)


def colorize(raster: RasterGrid) -> np.ndarray:
    """RGB image: bounded white, undecided black, escaping colored by ``step mod 32``."""
    lut = palette()
    img = np.zeros(raster.shape + (3,), dtype=np.uint8)
    esc = raster.verdict == kernels.ESCAPING
    img[esc] = lut[raster.step[esc] % len(lut)]
    img[raster.verdict == kernels.BOUNDED] = 255
    return img


def write_ppm(path: str | Path, rgb: np.ndarray) -> None:
    """Binary PPM (P6, maxval 255)."""
    rgb = np.ascontiguousarray(rgb, dtype=np.uint8)
    h, w, _ = rgb.shape
    with open(path, "wb") as fh:
        fh.write(f"P6\n{w} {h}\n255\n".encode("ascii"))
        fh.write(rgb.tobytes())


def read_ppm(path: str | Path) -> np.ndarray:
    data = Path(path).read_bytes()
    parts = data.split(maxsplit=4)
    if parts[0] != b"P6":
        raise ValueError("not a binary PPM")
    w, h, maxval = int(parts[1]), int(parts[2]), int(parts[3])
    if maxval != 255:
        raise ValueError("only maxval 255 is supported")
    return np.frombuffer(parts[4][: w * h * 3], dtype=np.uint8).reshape(h, w, 3)


def write_png(path: str | Path, rgb: np.ndarray) -> None:
    from PIL import Image

    Image.fromarray(np.ascontiguousarray(rgb, dtype=np.uint8), mode="RGB").save(path)


def write_raster(out_dir: str | Path, raster: RasterGrid, params: MapParams, stem: str = "slice", png: bool = True) -> dict:
    """Write the image(s), little-endian raw tensors and a JSON sidecar; returns the sidecar."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    rgb = colorize(raster)
    write_ppm(out / f"{stem}.ppm", rgb)
    if png:
        write_png(out / f"{stem}.png", rgb)
    files = {}
    for name, arr, dtype in (
        ("verdict", raster.verdict, "<i1"),
        ("step", raster.step, "<i4"),
        ("height", raster.height, "<f8"),
    ):
        fname = f"{stem}.{name}.raw"
        arr.astype(dtype).tofile(out / fname)
        files[name] = {"file": fname, "dtype": dtype}
    spec = raster.spec
    sidecar = {
        "shape": [spec.height, spec.width],
        "row_order": "row 0 is the top of the window (largest second coordinate)",
        "verdict_codes": {"0": "Undecided", "1": "Escaping", "2": "Bounded"},
        "tensors": files,
        "slice": {
            "plane": spec.plane,
            "origin": list(spec.origin),
            "e1": list(spec.e1),
            "e2": list(spec.e2),
            "window": list(spec.window),
            "horizon": spec.horizon,
            "escape_radius": spec.escape_radius,
        },
        "params": params.as_dict(),
        "counts": {
            "escaping": int(np.count_nonzero(raster.verdict == kernels.ESCAPING)),
            "bounded": int(np.count_nonzero(raster.verdict == kernels.BOUNDED)),
            "undecided": int(np.count_nonzero(raster.verdict == kernels.UNDECIDED)),
        },
    }
    (out / f"{stem}.json").write_text(json.dumps(sidecar, indent=2), encoding="utf-8")
    return sidecar
