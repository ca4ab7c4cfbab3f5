"""Dynamics on the invariant plane ``x1 = x2`` as a map of the complex plane.

The plane ``{(t, t, x3)}`` is identified with ``C`` through
``phi(t, t, x3) = (x3 + i*sqrt(2)*t) / lam``. In this coordinate the Zorich
map becomes

    g(x + iy) = nu * exp(lam*x) * (f3(s, s) + i*sqrt(2)*f1(s, s)),  s = y'/sqrt(2),

where ``f`` is the unscaled face and ``y'`` is ``y`` folded into
``[-sqrt(2), sqrt(2)]`` by reflections across ``y = sqrt(2) + 2*sqrt(2)*k``.
The plane ``x1 = -x2`` is handled by the reflection ``(x1, x2) -> (x1, -x2)``.
"""

from __future__ import annotations

import math
from typing import NamedTuple

import numpy as np
from scipy import integrate

from .errors import DomainError, OverflowGuardError, SeamError
from .geometry import MapParams

SQRT2 = math.sqrt(2.0)
STRIP = 2.0 * SQRT2  # width of one strip; g maps each strip two-to-one


def phi(x, plane: str = "diag") -> np.ndarray:
    """Complex coordinate of points on ``x1 = x2`` (``"diag"``) or ``x1 = -x2`` (``"anti"``).

    The scale is ``lam = 1``; divide by ``lam`` for the conjugacy.
    """
    x = np.asarray(x, dtype=float)
    t = x[..., 0]
    return x[..., 2] + 1j * SQRT2 * t


def phi_inverse(z, lam: float, plane: str = "diag") -> np.ndarray:
    """Point of the invariant plane with complex coordinate ``z``."""
    z = np.asarray(z, dtype=complex)
    t = lam * z.imag / SQRT2
    other = t if plane == "diag" else -t
    return np.stack([t, other, lam * z.real], axis=-1)


def to_plane_coordinate(params: MapParams, x, plane: str = "diag") -> np.ndarray:
    """``phi(x) = (x3 + i*sqrt(2)*x1) / lam``."""
    return phi(x, plane) / params.lam


def fold_strip(y) -> np.ndarray:
    """Fold imaginary parts into ``[-sqrt(2), sqrt(2)]``."""
    y = np.asarray(y, dtype=float)
    r = np.mod(y + SQRT2, 2.0 * STRIP) - SQRT2
    return np.where(r > SQRT2, STRIP - r, r)


def _face_diag(params: MapParams, s: np.ndarray) -> np.ndarray:
    v = np.stack([s, s], axis=-1)
    return params.face.unit(np.clip(v, -1.0, 1.0))


def _g_unchecked(params: MapParams, z: np.ndarray) -> np.ndarray:
    f = _face_diag(params, fold_strip(z.imag) / SQRT2)
    return params.nu * np.exp(params.lam * z.real) * (f[..., 2] + 1j * SQRT2 * f[..., 0])


def g_eval(params: MapParams, z) -> np.ndarray:
    """The planar map ``g``; vectorized over complex arrays."""
    z = np.asarray(z, dtype=complex)
    if not np.all(np.isfinite(z)):
        raise DomainError("non-finite planar point")
    top = np.max(params.lam * z.real) if z.size else 0.0
    if top > params.guard:
        raise OverflowGuardError(float(top), params.guard)
    out = _g_unchecked(params, z)
    return out if out.ndim else complex(out)


def strip_seam_distance(y) -> np.ndarray:
    """Distance of ``Im z`` to the fold lines ``sqrt(2) + 2*sqrt(2)*k`` and the kink lines ``2*sqrt(2)*k``."""
    r = np.abs(fold_strip(y))
    return np.minimum(SQRT2 - r, r)


class PlanarDet(NamedTuple):
    det: float
    log_abs_det: float


def planar_det_fd(params: MapParams, z, step: float | None = None) -> PlanarDet:
    """Finite-difference ``|det Dg(z)|`` of ``g`` as a map of ``R^2``.

    Uses ``Dg(x + iy) = exp(lam*x) * Dg(iy)`` so the difference is taken at
    real part zero and rescaled. Besides the fold lines, the lines
    ``y = 2*sqrt(2)*k`` are refused too: the face is only piecewise smooth
    along the diagonal through its apex.
    """
    z = complex(z)
    if step is None:
        step = 1e-6 * max(1.0, abs(z.imag))
    if float(strip_seam_distance(z.imag)) <= 2.0 * step:
        raise SeamError("Im z within 2*step of a strip seam")
    z0 = 1j * z.imag
    gx = (_g_unchecked(params, np.array(z0 + step)) - _g_unchecked(params, np.array(z0 - step))) / (2 * step)
    gy = (_g_unchecked(params, np.array(z0 + 1j * step)) - _g_unchecked(params, np.array(z0 - 1j * step))) / (2 * step)
    base = abs(gx.real * gy.imag - gx.imag * gy.real)
    log_det = math.log(base) + 2.0 * params.lam * z.real if base > 0 else -math.inf
    return PlanarDet(math.exp(log_det) if log_det < 709 else math.inf, log_det)


def planar_det_bound(params: MapParams, x: float, L: float | None = None) -> float:
    """Lower bound for ``|det Dg|`` at real part ``x``.

    Spherical face: ``nu^2 * lam * exp(2*lam*x) / L``. Other faces:
    ``nu^2 * lam * min|f| * sin(theta) * exp(2*lam*x) / (2*L)``.
    """
    face = params.face
    L = face.L_hat if L is None else L
    coeff = params.nu**2 * params.lam / L
    if face.kind != "sphere":
        coeff *= face.min_norm * math.sin(face.theta_S) / 2.0
    return coeff * math.exp(2.0 * params.lam * x)


def planar_area_Am(lam: float, m: int) -> float:
    """Area ``(2*sqrt(2)/lam) * log((m+1)/m)`` between consecutive curves ``gamma_m``."""
    if m < 1:
        raise DomainError("m must be at least 1")
    return 2.0 * SQRT2 / lam * math.log((m + 1) / m)


def _curve_x(params: MapParams, m: float, y: np.ndarray) -> np.ndarray:
    f1 = _face_diag(params, fold_strip(y) / SQRT2)[..., 0]
    if np.any(f1 <= 0):
        raise DomainError("face coordinate f1 is not positive on the sampled strip")
    return np.log(2.0 * m / (params.nu * f1)) / params.lam


def gamma_m_curve(params: MapParams, m: int, n_points: int, y_min: float = 1e-6) -> np.ndarray:
    """Polyline of the curve ``nu * exp(lam*x) * f1(y/sqrt2, y/sqrt2) = 2m`` in the strip ``0 < y < 2*sqrt(2)``.

    Returns an array of shape ``(2*n_points - 1, 2)`` of ``(x, y)`` vertices
    ordered by increasing ``y``: ``n_points`` samples on ``[y_min, sqrt(2)]``
    (geometrically graded toward the singular end) and their mirror images.
    """
    if m < 1 or n_points < 2:
        raise DomainError("need m >= 1 and n_points >= 2")
    lo = np.geomspace(y_min, SQRT2, n_points)
    y = np.concatenate([lo, STRIP - lo[-2::-1]])
    return np.column_stack([_curve_x(params, m, y), y])


def curve_residual(params: MapParams, m: int, pts: np.ndarray) -> float:
    """Largest relative defect of the curve equation at the vertices."""
    f1 = _face_diag(params, fold_strip(pts[:, 1]) / SQRT2)[..., 0]
    lhs = params.nu * np.exp(params.lam * pts[:, 0]) * f1
    return float(np.max(np.abs(lhs - 2 * m)) / (2 * m))


def polygon_area(pts: np.ndarray) -> float:
    """Shoelace area of a closed polygon given by its vertices."""
    x, y = pts[:, 0], pts[:, 1]
    return 0.5 * abs(float(np.dot(x, np.roll(y, -1)) - np.dot(y, np.roll(x, -1))))


def strip_area_between(params: MapParams, m: int, n_points: int = 4000, y_min: float = 1e-9) -> float:
    """Area between ``gamma_m`` and ``gamma_{m+1}`` from their polylines."""
    a = gamma_m_curve(params, m, n_points, y_min)
    b = gamma_m_curve(params, m + 1, n_points, y_min)
    return polygon_area(np.concatenate([a, b[::-1]]))


def curves_intersect(a: np.ndarray, b: np.ndarray | None = None) -> bool:
    """Whether two polylines cross (or one polyline crosses itself when ``b`` is None)."""
    from shapely.geometry import LineString

    la = LineString(a)
    if b is None:
        return not la.is_simple
    return la.intersects(LineString(b))


def planar_area_A0(params: MapParams, cutoff: float) -> float:
    """Area between the imaginary axis and ``gamma_1`` over ``cutoff < y < 2*sqrt(2) - cutoff``.

    The integrand ``max(0, x(y))`` has a logarithmic singularity at the strip
    edges, so the area converges as ``cutoff -> 0``.
    """

    def width(y):
        return max(0.0, float(_curve_x(params, 1, np.array([y]))[0]))

    val, _ = integrate.quad(width, cutoff, SQRT2, limit=200, points=[SQRT2 / 2])
    return 2.0 * val


def planar_area_A0_bound(params: MapParams, L: float | None = None) -> float:
    """Upper bound ``(2/lam) * integral_0^sqrt2 log(4L/(nu*y)) dy`` in closed form."""
    L = params.face.L_hat if L is None else L
    a = SQRT2
    return 2.0 / params.lam * a * (math.log(4.0 * L / (params.nu * a)) + 1.0)


# ---------------------------------------------------------------------------
# area growth


class GrowthReport(NamedTuple):
    areas: list
    ratios: list
    contact_step: int | None
    ratio_bound: float


def _touches_real_preimages(ys: np.ndarray) -> bool:
    k_lo = np.floor(np.min(ys) / STRIP)
    k_hi = np.floor(np.max(ys) / STRIP)
    on_line = np.any(np.mod(ys, STRIP) == 0.0)
    return bool(k_lo != k_hi or on_line)


def area_growth_experiment(
    params: MapParams, seed_region, n_steps: int, cells: int = 48, L: float | None = None
) -> GrowthReport:
    """Areas of ``g^n(V)`` for a rectangle ``V = [x0, x1] x [y0, y1]``.

    ``V`` is cut into ``cells x cells`` quads whose corners are pushed forward;
    the image area is the area of the union of the image quads, so two-to-one
    folding is counted once. Stops with ``contact_step`` set when an image
    meets a line ``y = 2*sqrt(2)*k``.
    """
    from shapely import union_all
    from shapely.geometry import Polygon

    x0, x1, y0, y1 = map(float, seed_region)
    if not (x1 > x0 and y1 > y0):
        raise DomainError("seed region must have positive area")
    if x0 < 0:
        raise DomainError("seed region must lie in the right half-plane")
    L = params.face.L_hat if L is None else L
    bound = planar_det_bound(params, 0.0, L) / 2.0
    gx, gy = np.meshgrid(np.linspace(x0, x1, cells + 1), np.linspace(y0, y1, cells + 1), indexing="ij")
    z = gx + 1j * gy
    areas = [(x1 - x0) * (y1 - y0)]
    ratios: list[float] = []
    if _touches_real_preimages(z.imag):
        return GrowthReport(areas, ratios, 0, bound)
    for step in range(1, n_steps + 1):
        if np.max(params.lam * z.real) > params.guard:
            break
        z = _g_unchecked(params, z)
        if _touches_real_preimages(z.imag):
            return GrowthReport(areas, ratios, step, bound)
        quads = []
        for i in range(cells):
            for j in range(cells):
                c = [z[i, j], z[i + 1, j], z[i + 1, j + 1], z[i, j + 1]]
                poly = Polygon([(w.real, w.imag) for w in c])
                if not poly.is_valid:
                    poly = poly.buffer(0)
                quads.append(poly)
        area = float(union_all(quads).area)
        ratios.append(area / areas[-1])
        areas.append(area)
    return GrowthReport(areas, ratios, None, bound)
