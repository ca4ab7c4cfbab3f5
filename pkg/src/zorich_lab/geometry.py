"""Reflection folding of the plane and the face maps of a Zorich map.

A Zorich map is built from a face map ``h`` sending the square ``lam*Q``
(``Q = [-1, 1]^2``) onto a surface over it: the upper hemisphere of radius
``lam`` for the spherical face, or a square pyramid for the pyramid face.
Points of the plane are folded into ``lam*Q`` by reflections across the lines
``t = (2k+1)*lam`` before the face map is applied.

All functions are vectorized over leading axes: a point of the plane is an
array with trailing dimension 2, a point of space has trailing dimension 3.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property
from typing import Callable, NamedTuple

import numpy as np

from .config import GUARD
from .errors import DomainError

_SQUARE_TOL = 1e-12
_SURFACE_TOL = 1e-9


def _as_array(x, trailing: int, name: str) -> np.ndarray:
    arr = np.asarray(x, dtype=float)
    if arr.shape[-1:] != (trailing,):
        raise DomainError(f"{name} must have trailing dimension {trailing}, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise DomainError(f"{name} has non-finite components")
    return arr


def _check_lambda(lam: float) -> float:
    lam = float(lam)
    if not (lam > 0 and math.isfinite(lam)):
        raise DomainError(f"lambda must be positive and finite, got {lam}")
    return lam


# ---------------------------------------------------------------------------
# folding


def fold_coordinate(t, lam: float):
    """Fold a coordinate into ``[-lam, lam]`` by reflections.

    The reflections are across the lines ``t = (2k+1)*lam``. A point on a
    reflection line is assigned to the lower cell.

    Parameters
    ----------
    t : float or array_like
        Coordinate(s) to fold.
    lam : float
        Half-width of the fundamental interval.

    Returns
    -------
    t_folded : float or ndarray
        Folded coordinate in ``[-lam, lam]``.
    reflections : int or ndarray of int
        Number of reflections used, ``|k|`` for cell index ``k``.

    Examples
    --------
    >>> fold_coordinate(5.0, 2.0)
    (-1.0, 1)
    """
    lam = _check_lambda(lam)
    arr = np.asarray(t, dtype=float)
    if not np.all(np.isfinite(arr)):
        raise DomainError("cannot fold a non-finite coordinate")
    k = np.ceil((arr - lam) / (2.0 * lam))
    shifted = arr - 2.0 * lam * k
    odd = np.mod(k, 2.0) != 0.0
    folded = np.clip(np.where(odd, -shifted, shifted), -lam, lam)
    # beyond int64 range only the parity of the count is kept
    ak = np.abs(k)
    reflections = np.where(ak < 2.0**62, ak, np.mod(ak, 2.0)).astype(np.int64)
    if arr.ndim == 0:
        return float(folded), int(reflections)
    return folded, reflections


def cell_index(t, lam: float) -> np.ndarray:
    """Integer cell index ``k`` of a coordinate, so that ``|t - 2k*lam| <= lam``."""
    lam = _check_lambda(lam)
    return np.ceil((np.asarray(t, dtype=float) - lam) / (2.0 * lam)).astype(np.int64)


class FoldResult(NamedTuple):
    """Folded plane point ``u`` in ``lam*Q`` and the reflection parity (0 or 1)."""

    u: np.ndarray
    parity: np.ndarray | int


def fold_plane(x, lam: float) -> FoldResult:
    """Fold a plane point into ``lam*Q``.

    The parity is the total number of reflections modulo 2; it decides on
    which side of ``x3 = 0`` the map sends the cell.
    """
    arr = _as_array(x, 2, "x")
    f1, r1 = fold_coordinate(arr[..., 0], lam)
    f2, r2 = fold_coordinate(arr[..., 1], lam)
    u = np.stack([np.asarray(f1, dtype=float), np.asarray(f2, dtype=float)], axis=-1)
    parity = (np.asarray(r1) + np.asarray(r2)) % 2
    if arr.ndim == 1:
        return FoldResult(u, int(parity))
    return FoldResult(u, parity.astype(np.int64))


def seam_distance(x, lam: float) -> np.ndarray:
    """Distance from plane point(s) to the nearest non-smooth seam of the map.

    Seams are the fold lines ``x_i = (2k+1)*lam`` and the diagonals of each
    folded square, where ``max(|u1|, |u2|)`` has a kink.
    """
    u, _ = fold_plane(x, lam)
    a1 = np.abs(u[..., 0])
    a2 = np.abs(u[..., 1])
    return np.minimum(np.minimum(lam - a1, lam - a2), np.abs(a1 - a2) / math.sqrt(2.0))


def smooth_piece(x, lam: float) -> tuple:
    """Label of the smooth piece of the map containing a single plane point.

    Two points with equal labels are joined by a segment on which the map is
    smooth (the pieces are convex triangles).
    """
    arr = _as_array(x, 2, "x")
    k1 = int(cell_index(arr[0], lam))
    k2 = int(cell_index(arr[1], lam))
    u = fold_plane(arr, lam).u
    axis = 0 if abs(u[0]) >= abs(u[1]) else 1
    return (k1, k2, axis, bool(u[axis] >= 0.0))


# ---------------------------------------------------------------------------
# unscaled faces on Q


def _sphere_unit(v: np.ndarray) -> np.ndarray:
    m = np.maximum(np.abs(v[..., 0]), np.abs(v[..., 1]))
    q3 = 1.0 - m
    norm = np.sqrt(v[..., 0] * v[..., 0] + v[..., 1] * v[..., 1] + q3 * q3)
    return np.stack([v[..., 0] / norm, v[..., 1] / norm, q3 / norm], axis=-1)


def _pyramid_unit(v: np.ndarray) -> np.ndarray:
    m = np.maximum(np.abs(v[..., 0]), np.abs(v[..., 1]))
    return np.stack([v[..., 0], v[..., 1], 1.0 - m], axis=-1)


def _ray_to_square(w: np.ndarray) -> np.ndarray:
    """Point of ``Q`` whose pyramid (or sphere) image lies on the ray through ``w``."""
    den = w[..., 2] + np.maximum(np.abs(w[..., 0]), np.abs(w[..., 1]))
    v = np.stack([w[..., 0] / den, w[..., 1] / den], axis=-1)
    return np.clip(v, -1.0, 1.0)


def _check_square(u: np.ndarray, lam: float) -> None:
    if np.any(np.abs(u) > lam * (1.0 + _SQUARE_TOL)):
        raise DomainError(f"point outside the square of half-width {lam}")


def _check_ray(w: np.ndarray) -> None:
    if np.any(w[..., 2] < -_SURFACE_TOL * np.linalg.norm(w, axis=-1)):
        raise DomainError("direction lies in the lower half-space x3 < 0")
    den = w[..., 2] + np.maximum(np.abs(w[..., 0]), np.abs(w[..., 1]))
    if np.any(den <= 0.0):
        raise DomainError("zero direction cannot be inverted")


def face_sphere_eval(u, lam: float) -> np.ndarray:
    """Spherical face ``h(u) = lam * q(u/lam) / |q(u/lam)|``.

    Here ``q(v) = (v1, v2, 1 - max(|v1|, |v2|))``; the square ``lam*Q`` goes
    onto the closed upper hemisphere of radius ``lam``.
    """
    lam = _check_lambda(lam)
    u = _as_array(u, 2, "u")
    _check_square(u, lam)
    return lam * _sphere_unit(np.clip(u / lam, -1.0, 1.0))


def face_sphere_invert(s, lam: float) -> np.ndarray:
    """Inverse of :func:`face_sphere_eval` on the upper hemisphere."""
    lam = _check_lambda(lam)
    s = _as_array(s, 3, "s")
    r = np.linalg.norm(s, axis=-1)
    if np.any(np.abs(r - lam) > _SURFACE_TOL * lam):
        raise DomainError(f"point is not on the sphere of radius {lam}")
    _check_ray(s)
    return lam * _ray_to_square(s / lam)


def face_pyramid_eval(u, lam: float) -> np.ndarray:
    """Pyramid face ``h(u) = (u1, u2, lam - max(|u1|, |u2|))``."""
    lam = _check_lambda(lam)
    u = _as_array(u, 2, "u")
    _check_square(u, lam)
    u = np.clip(u, -lam, lam)
    m = np.maximum(np.abs(u[..., 0]), np.abs(u[..., 1]))
    return np.stack([u[..., 0], u[..., 1], lam - m], axis=-1)


def face_pyramid_invert(w, lam: float) -> np.ndarray:
    """Point of ``lam*Q`` whose pyramid image lies on the ray through ``w``.

    ``w`` need not lie on the surface: the surface point is ``t*w`` with
    ``t = lam / (w3 + max(|w1|, |w2|))`` and the result is ``(t*w1, t*w2)``.
    """
    lam = _check_lambda(lam)
    w = _as_array(w, 3, "w")
    _check_ray(w)
    return lam * _ray_to_square(w)


# ---------------------------------------------------------------------------
# face models


@dataclass(frozen=True, eq=False)
class FaceModel:
    """A face map together with its estimated geometric constants.

    Parameters
    ----------
    kind : str
        ``"sphere"``, ``"pyramid"`` or ``"generalized"``.
    unit : callable
        Vectorized unscaled face ``Q -> R^3``, shape ``(..., 2) -> (..., 3)``.
    unit_ray_inverse : callable, optional
        Vectorized map from a direction ``w`` (``w3 >= 0``) to the point of
        ``Q`` whose image lies on the ray through ``w``. When omitted the ray
        equation is solved numerically.
    n_samples, seed : int
        Sampling budget for the constant estimates, which are computed lazily.

    Notes
    -----
    The constants are properties of the unscaled face ``unit`` on ``Q``.
    ``L_hat`` is the larger of the sampled upper Lipschitz ratio and the
    reciprocal of the lower one, so that the face is ``L_hat``-bi-Lipschitz
    on the sample.
    """

    kind: str
    unit: Callable[[np.ndarray], np.ndarray]
    unit_ray_inverse: Callable[[np.ndarray], np.ndarray] | None = None
    n_samples: int = 200_000
    seed: int = 0

    def eval(self, u, lam: float) -> np.ndarray:
        """Scaled face ``h(u) = lam * unit(u/lam)`` on ``lam*Q``."""
        if self.kind == "sphere":
            return face_sphere_eval(u, lam)
        if self.kind == "pyramid":
            return face_pyramid_eval(u, lam)
        lam = _check_lambda(lam)
        u = _as_array(u, 2, "u")
        _check_square(u, lam)
        return lam * self.unit(np.clip(u / lam, -1.0, 1.0))

    def invert_ray(self, w, lam: float) -> np.ndarray:
        """Point ``u`` of ``lam*Q`` with ``h(u)`` on the ray through ``w``."""
        lam = _check_lambda(lam)
        w = _as_array(w, 3, "w")
        _check_ray(w)
        if self.kind in ("sphere", "pyramid"):
            return lam * _ray_to_square(w)
        if self.unit_ray_inverse is not None:
            return lam * self.unit_ray_inverse(w)
        return lam * _solve_ray(self.unit, w)

    def invert(self, s, lam: float) -> np.ndarray:
        """Inverse of :meth:`eval` for points on the scaled surface."""
        s = _as_array(s, 3, "s")
        u = self.invert_ray(s, lam)
        back = self.eval(u, lam)
        if np.any(np.linalg.norm(back - s, axis=-1) > 1e-8 * max(1.0, float(lam))):
            raise DomainError("point is not on the face surface")
        return u

    @cached_property
    def lipschitz(self) -> tuple[float, float]:
        return estimate_bilipschitz(self, self.n_samples, seed=self.seed)

    @property
    def L_hat(self) -> float:
        upper, lower = self.lipschitz
        return max(upper, 1.0 / lower)

    @property
    def ell_hat(self) -> float:
        return self.lipschitz[1]

    @cached_property
    def min_norm(self) -> float:
        return estimate_min_norm(self)

    @cached_property
    def theta_S(self) -> float:
        return estimate_face_angle(self, self.n_samples, seed=self.seed)

    def symmetry_defect(self, n: int = 1000, seed: int = 0) -> float:
        """Largest violation of the swap and diagonal symmetries at sampled points."""
        rng = np.random.default_rng(seed)
        v = 2.0 * rng.random((n, 2)) - 1.0
        h = self.unit(v)
        hs = self.unit(v[:, ::-1])
        swap = np.max(np.abs(hs - h[:, [1, 0, 2]]))
        t = v[:, 0]
        hd = self.unit(np.stack([t, t], axis=-1))
        ha = self.unit(np.stack([t, -t], axis=-1))
        diag = max(np.max(np.abs(hd[:, 0] - hd[:, 1])), np.max(np.abs(ha[:, 0] + ha[:, 1])))
        top = np.max(np.abs(self.unit(np.zeros(2)) - np.array([0.0, 0.0, 1.0])))
        return float(max(swap, diag, top))


def _solve_ray(unit: Callable, w: np.ndarray) -> np.ndarray:
    from scipy.optimize import least_squares

    w = np.asarray(w, dtype=float)
    flat_w = w.reshape(-1, 3)
    flat_out = np.empty((flat_w.shape[0], 2))
    for idx, wi in enumerate(flat_w):
        wn = wi / np.linalg.norm(wi)
        sol = least_squares(
            lambda v: np.cross(unit(v), wn),
            _ray_to_square(wi),
            bounds=([-1.0, -1.0], [1.0, 1.0]),
            xtol=1e-15,
            ftol=1e-15,
            gtol=1e-15,
        )
        flat_out[idx] = sol.x
    return flat_out.reshape(w.shape[:-1] + (2,))


def generalized_face(unit: Callable, unit_ray_inverse: Callable | None = None, *, check: bool = True, **kw) -> FaceModel:
    """Wrap a user-supplied face on ``Q``, checking its required symmetries."""
    face = FaceModel("generalized", unit, unit_ray_inverse, **kw)
    if check:
        defect = face.symmetry_defect()
        if defect > 1e-12:
            raise DomainError(f"face violates the required symmetries (defect {defect:.3g})")
    return face


_FACES: dict[str, FaceModel] = {}


def get_face(kind: str) -> FaceModel:
    """Shared instance of a built-in face (so constants are estimated once)."""
    if kind not in ("sphere", "pyramid"):
        raise DomainError(f"unknown face kind {kind!r}")
    if kind not in _FACES:
        _FACES[kind] = FaceModel(kind, _sphere_unit if kind == "sphere" else _pyramid_unit)
    return _FACES[kind]


# ---------------------------------------------------------------------------
# constant estimation

_ANCHOR_PAIRS = np.array(
    [
        [[0.0, 0.0], [1.0, 0.0]],
        [[0.0, 0.0], [0.0, 1.0]],
        [[0.0, 0.0], [1.0, 1.0]],
        [[1.0, 1.0], [-1.0, -1.0]],
        [[1.0, -1.0], [-1.0, 1.0]],
        [[0.5, 0.0], [0.5 + 1e-7, 0.0]],
        [[1.0, 1.0], [1.0, 1.0 - 1e-7]],
        [[1.0, 1.0], [1.0 - 1e-7, 1.0 - 1e-7]],
    ]
)


def _sample_pairs(n: int, seed: int) -> tuple[np.ndarray, np.ndarray]:
    """Nested random pairs in ``Q``: the first ``n`` rows never depend on ``n``."""
    a = np.random.default_rng(seed).random((n, 7))
    u = 2.0 * a[:, 0:2] - 1.0
    phi = 2.0 * np.pi * a[:, 2]
    delta = 10.0 ** (-7.0 + 7.5 * a[:, 3])
    v = np.clip(u + delta[:, None] * np.stack([np.cos(phi), np.sin(phi)], axis=-1), -1.0, 1.0)
    # strata: far pairs, pairs anchored at corners, pairs anchored on edges
    far = a[:, 4] < 0.1
    v[far] = 2.0 * a[far, 5:7] - 1.0
    corner = (a[:, 4] >= 0.1) & (a[:, 4] < 0.2)
    u[corner] = np.where(a[corner, 5:7] < 0.5, -1.0, 1.0)
    edge = (a[:, 4] >= 0.2) & (a[:, 4] < 0.3)
    side = np.where(a[edge, 5] < 0.5, -1.0, 1.0)
    u[edge, 0] = np.where(a[edge, 6] < 0.5, side, u[edge, 0])
    u[edge, 1] = np.where(a[edge, 6] < 0.5, u[edge, 1], side)
    snapped = corner | edge
    v[snapped] = np.clip(
        u[snapped] + delta[snapped, None] * np.stack([np.cos(phi[snapped]), np.sin(phi[snapped])], axis=-1), -1.0, 1.0
    )
    return u, v


def estimate_bilipschitz(face: FaceModel, n_samples: int, seed: int = 0) -> tuple[float, float]:
    """Sampled upper and lower Lipschitz ratios of the unscaled face.

    Pairs mix separations over many scales (log-uniform from 1e-7 to the
    diameter of ``Q``) plus a few fixed anchor pairs. Samples are nested in
    ``n_samples`` for a fixed seed, so the upper ratio is nondecreasing and
    the lower ratio nonincreasing as ``n_samples`` grows.

    Returns
    -------
    upper, lower : float
        Max and min of ``|f(u) - f(v)| / |u - v|`` over the sampled pairs.
    """
    if n_samples < 2:
        raise DomainError("need at least two samples")
    u, v = _sample_pairs(n_samples, seed)
    u = np.concatenate([_ANCHOR_PAIRS[:, 0], u])
    v = np.concatenate([_ANCHOR_PAIRS[:, 1], v])
    du = np.linalg.norm(u - v, axis=-1)
    keep = du > 1e-12
    ratio = np.linalg.norm(face.unit(u[keep]) - face.unit(v[keep]), axis=-1) / du[keep]
    return float(ratio.max()), float(ratio.min())


def estimate_face_angle(face: FaceModel, n_samples: int, seed: int = 0) -> float:
    """Smallest sampled angle between a position vector and a nearby chord.

    For close points ``z, w`` on the unscaled surface the acute angle between
    the segments ``0 -> z`` and ``w -> z`` is measured; the minimum over the
    (nested) sample is returned.
    """
    if n_samples < 2:
        raise DomainError("need at least two samples")
    a = np.random.default_rng(seed + 1).random((n_samples, 4))
    u = 2.0 * a[:, 0:2] - 1.0
    phi = 2.0 * np.pi * a[:, 2]
    delta = 10.0 ** (-5.0 + 3.0 * a[:, 3])
    v = np.clip(u + delta[:, None] * np.stack([np.cos(phi), np.sin(phi)], axis=-1), -1.0, 1.0)
    z = face.unit(u)
    w = face.unit(v)
    chord = z - w
    zn = np.linalg.norm(z, axis=-1)
    cn = np.linalg.norm(chord, axis=-1)
    keep = (zn > 0) & (cn > 1e-14)
    if not np.any(keep):
        raise DomainError("all sampled pairs were degenerate")
    cosang = np.abs(np.sum(z[keep] * chord[keep], axis=-1)) / (zn[keep] * cn[keep])
    return float(np.arccos(np.clip(cosang, 0.0, 1.0)).min())


def estimate_min_norm(face: FaceModel, resolution: int = 401) -> float:
    """Minimum of ``|f|`` over a uniform grid on ``Q`` (grid includes 0 and +-1/2)."""
    t = np.linspace(-1.0, 1.0, resolution)
    g = np.stack(np.meshgrid(t, t, indexing="ij"), axis=-1)
    return float(np.linalg.norm(face.unit(g), axis=-1).min())


# ---------------------------------------------------------------------------
# parameters


@dataclass(frozen=True)
class MapParams:
    """Parameters of one Zorich map ``Z(x) = nu * exp(x3) * h(x1, x2)``.

    Parameters
    ----------
    lam : float
        Scale ``lambda > 0`` of the fundamental square ``lam*Q``.
    nu : float
        Multiplier ``nu > 0``.
    face : FaceModel or str
        Face map, or the name of a built-in face.
    guard : float
        Heights above this value are not exponentiated.
    """

    lam: float
    nu: float
    face: FaceModel | str = "sphere"
    guard: float = GUARD

    def __post_init__(self):
        if not (self.lam > 0 and math.isfinite(self.lam)):
            raise DomainError(f"lambda must be positive, got {self.lam}")
        if not (self.nu > 0 and math.isfinite(self.nu)):
            raise DomainError(f"nu must be positive, got {self.nu}")
        object.__setattr__(self, "lam", float(self.lam))
        object.__setattr__(self, "nu", float(self.nu))
        if isinstance(self.face, str):
            object.__setattr__(self, "face", get_face(self.face))

    @property
    def kappa(self) -> float:
        """The product ``nu * lam``, multiplier of the axis dynamics."""
        return self.nu * self.lam

    def as_dict(self) -> dict:
        return {"lambda": self.lam, "nu": self.nu, "face": self.face.kind}
