"""Itineraries, escape classification, periodic points and invariant sets.

Two partitions of space into beams are used here. The coarse partition
``T8_(i,j)`` consists of ``4*lam x 4*lam`` squares in the rotated coordinates
``d = x1 - x2``, ``s = x1 + x2``; it drives :func:`beam_index` and
:func:`itinerary`. The rectangles ``B_(i,j)`` (``2*lam`` wide in ``d``,
``4*lam`` in ``s``) are used for the invariant set extracted by
:func:`lambda_Z_approx`. The fine diamonds ``T_(i,j)`` of the inverse
branches live in :mod:`zorich_lab.branches`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple, Sequence

import numpy as np

from . import kernels
from .branches import BeamIndex, in_beam, pullback_orbit, square_branch_inverse, word_admissible
from .config import ESCAPE_RADIUS, HORIZON
from .errors import ConvergenceError, DomainError, InadmissibleError
from .geometry import MapParams, _as_array
from .zorich import _eval_unchecked

ESCAPING = "Escaping"
BOUNDED = "Bounded"
UNDECIDED = "Undecided"
_VERDICT_NAMES = {kernels.ESCAPING: ESCAPING, kernels.BOUNDED: BOUNDED, kernels.UNDECIDED: UNDECIDED}


# ---------------------------------------------------------------------------
# partitions


def beam_index(x, lam: float) -> tuple[int, int]:
    """Index ``(i, j)`` of the coarse beam ``T8_(i,j)`` containing ``x``.

    ``T8_(i,j) = T8_(0,0) + 2i*(lam, lam, 0) + 2j*(lam, -lam, 0)`` with
    ``T8_(0,0) = {-2*lam <= d < 2*lam, -2*lam < s <= 2*lam}``: the edge
    ``d = -2*lam`` and the edge ``s = 2*lam`` belong to the beam, the other
    two do not. Every point of space gets exactly one index; the edges are
    decided on the rounded values of ``d`` and ``s``.
    """
    d = float(x[0]) - float(x[1])
    s = float(x[0]) + float(x[1])
    four = 4.0 * lam
    j = math.floor((d + 2.0 * lam) / four)
    i = math.ceil((s - 2.0 * lam) / four)
    return i, j


def beam_index_many(x, lam: float) -> np.ndarray:
    """Vectorized :func:`beam_index`; returns an int array of shape ``(..., 2)``."""
    x = np.asarray(x, dtype=float)
    d = x[..., 0] - x[..., 1]
    s = x[..., 0] + x[..., 1]
    j = np.floor((d + 2.0 * lam) / (4.0 * lam))
    i = np.ceil((s - 2.0 * lam) / (4.0 * lam))
    return np.stack([i, j], axis=-1).astype(np.int64)


def in_coarse_beam(x, beam, lam: float) -> bool:
    """Membership in ``T8_(i,j)`` from its description as a union of pieces.

    ``T8_(0,0)`` is the union of two open rectangles ``B_(0,0)``,
    ``B_(0,-1)``, the segment ``x1 = x2`` between them, and the two boundary
    segments ``x1 = x2 - 2*lam`` (``-2*lam < x1 <= 0``) and
    ``x1 = -x2 + 2*lam`` (``0 <= x1 < 2*lam``). Independent of the
    floor/ceil formula in :func:`beam_index`.
    """
    i, j = beam
    # translate back into T8_(0,0)
    shift = 2.0 * lam * np.array([i + j, i - j], dtype=float)
    x1 = float(x[0]) - shift[0]
    x2 = float(x[1]) - shift[1]
    d, s = x1 - x2, x1 + x2
    w = 2.0 * lam
    in_b00 = 0.0 < d < w and abs(s) < w
    in_b0m = -w < d < 0.0 and abs(s) < w
    middle = x1 == x2 and -lam < x1 < lam
    left = x1 == x2 - w and -w < x1 <= 0.0
    top = x1 == -x2 + w and 0.0 <= x1 < w
    return in_b00 or in_b0m or middle or left or top


def coarse_of_diamond(beam) -> tuple[int, int]:
    """Coarse beam ``T8`` containing the (open) diamond ``T_(i,j)`` of the inverse branches."""
    i, j = beam
    return math.ceil((2 * i - 1) / 4), math.floor((2 * j + 3) / 4)


def diamond_index(x, lam: float) -> BeamIndex:
    """Fine diamond ``T_(i,j) = {2*lam*j < d < 2*lam*(j+1), 2*lam*i < s < 2*lam*(i+1)}`` of ``x``."""
    d = float(x[0]) - float(x[1])
    s = float(x[0]) + float(x[1])
    return BeamIndex(math.floor(s / (2 * lam)), math.floor(d / (2 * lam)))


def rect_beam_index(x, lam: float) -> tuple[int, int]:
    """Index of the rectangle ``B_(i,j) = {2*lam*j < d < 2*lam*(j+1), |s - 4*lam*i| < 2*lam}``."""
    d = float(x[0]) - float(x[1])
    s = float(x[0]) + float(x[1])
    return math.floor((s + 2 * lam) / (4 * lam)), math.floor(d / (2 * lam))


def in_closed_B00(x, lam: float, tol: float = 0.0) -> np.ndarray:
    """Membership in the closed rectangle ``0 <= d <= 2*lam, |s| <= 2*lam``."""
    x = np.asarray(x, dtype=float)
    d = x[..., 0] - x[..., 1]
    s = x[..., 0] + x[..., 1]
    return (d >= -tol) & (d <= 2 * lam + tol) & (np.abs(s) <= 2 * lam + tol)


# ---------------------------------------------------------------------------
# itineraries


@dataclass(frozen=True)
class Itinerary:
    """Coarse beams visited by ``x, Z(x), Z^2(x), ...``.

    ``truncated`` is set when an iterate could not be computed (overflow), in
    which case ``symbols`` is shorter than the requested horizon.
    """

    symbols: tuple
    horizon: int
    truncated: bool = False

    def __len__(self) -> int:
        return len(self.symbols)

    def shifted(self) -> "Itinerary":
        return Itinerary(self.symbols[1:], self.horizon - 1, self.truncated)


def _orbit_points(params: MapParams, x: np.ndarray, count: int) -> tuple[list, bool]:
    """Up to ``count`` orbit points starting at ``x``; stops at overflow or non-finite values."""
    pts = [x]
    cur = x
    while len(pts) < count:
        if cur[2] > params.guard:
            return pts, True
        cur = _eval_unchecked(params, cur)
        if not np.all(np.isfinite(cur)):
            return pts, True
        pts.append(cur)
    return pts, False


def itinerary(params: MapParams, x, horizon: int, partition: str = "coarse") -> Itinerary:
    """Itinerary ``symbols[k] = index of Z^k(x)`` for ``k = 0, ..., horizon - 1``.

    Parameters
    ----------
    partition : {"coarse", "diamond", "rect"}
        Which beam partition to read symbols from (:func:`beam_index`,
        :func:`diamond_index` or :func:`rect_beam_index`).
    """
    if horizon < 1:
        raise DomainError("horizon must be at least 1")
    index = {"coarse": beam_index, "diamond": diamond_index, "rect": rect_beam_index}.get(partition)
    if index is None:
        raise DomainError(f"unknown partition {partition!r}")
    x = _as_array(x, 3, "x").reshape(3)
    pts, truncated = _orbit_points(params, x, horizon)
    return Itinerary(tuple(tuple(index(p, params.lam)) for p in pts), horizon, truncated)


# ---------------------------------------------------------------------------
# escape classification


@dataclass(frozen=True)
class Classification:
    """Finite-horizon verdict on one orbit.

    Attributes
    ----------
    verdict : str
        ``"Escaping"``, ``"Bounded"`` or ``"Undecided"``.
    witness : float
        Last computed height for escaping or undecided orbits; the bound
        radius for bounded ones.
    step : int
        First step at which escape was declared, or -1.
    """

    verdict: str
    horizon: int
    escape_radius: float
    witness: float
    step: int = -1


def default_bound_radius(params: MapParams) -> float:
    """Radius of the box an orbit must end in to count as bounded."""
    return max(4.0 * params.lam, 2.0 * params.nu * params.lam)


def _check_classify_args(params, horizon, escape_radius):
    if horizon < 1:
        raise DomainError("horizon must be at least 1")
    if not escape_radius > params.nu * params.lam:
        raise DomainError("escape_radius must exceed nu*lam")


def classify_point(
    params: MapParams,
    x,
    horizon: int = HORIZON,
    escape_radius: float = ESCAPE_RADIUS,
    bound_radius: float | None = None,
) -> Classification:
    """Classify the orbit of ``x`` as escaping, bounded or undecided.

    An orbit escapes when some iterate leaves the ball of radius
    ``escape_radius`` while its heights increased over the last three
    recorded steps; a height beyond the overflow guard counts as a step to
    ``+inf``. It is bounded when no iterate left the ball and the last one
    lies within ``bound_radius`` of the origin.
    """
    _check_classify_args(params, horizon, escape_radius)
    box = default_bound_radius(params) if bound_radius is None else float(bound_radius)
    x = _as_array(x, 3, "x").reshape(3)
    code = kernels.FACE_CODES.get(params.face.kind)
    if code is None:
        v, s, h = _classify_numpy(params, x[None, :], horizon, escape_radius, box)
        v, s, h = int(v[0]), int(s[0]), float(h[0])
    else:
        v, s, h = kernels.classify_one(
            x[0], x[1], x[2], params.lam, params.nu, code, horizon, escape_radius, params.guard, box
        )
    verdict = _VERDICT_NAMES[int(v)]
    witness = box if verdict == BOUNDED else float(h)
    return Classification(verdict, horizon, float(escape_radius), witness, int(s))


def classify_points(
    params: MapParams,
    x,
    horizon: int = HORIZON,
    escape_radius: float = ESCAPE_RADIUS,
    bound_radius: float | None = None,
    engine: str = "compiled",
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Classify many points.

    Returns integer verdict codes (see :mod:`zorich_lab.kernels`), escape
    steps and last heights. ``engine="numpy"`` runs the vectorized reference
    implementation instead of the compiled kernel.
    """
    _check_classify_args(params, horizon, escape_radius)
    box = default_bound_radius(params) if bound_radius is None else float(bound_radius)
    x = np.ascontiguousarray(_as_array(x, 3, "x").reshape(-1, 3))
    code = kernels.FACE_CODES.get(params.face.kind)
    if engine == "numpy" or code is None:
        return _classify_numpy(params, x, horizon, escape_radius, box)
    n = len(x)
    verdict = np.empty(n, dtype=np.int8)
    step = np.empty(n, dtype=np.int32)
    height = np.empty(n)
    kernels.classify_many(x, params.lam, params.nu, code, horizon, escape_radius, params.guard, box, verdict, step, height)
    return verdict, step, height


def _classify_numpy(params: MapParams, x: np.ndarray, horizon: int, radius: float, box: float):
    n = len(x)
    verdict = np.full(n, kernels.UNDECIDED, dtype=np.int8)
    step = np.full(n, -1, dtype=np.int32)
    active = np.ones(n, dtype=bool)
    cur = x.copy()
    h_cur = cur[:, 2].copy()
    h_prev1 = np.zeros(n)
    h_prev2 = np.zeros(n)
    count = 1
    exceeded = np.linalg.norm(cur, axis=1) > radius
    with np.errstate(over="ignore", invalid="ignore"):
        for k in range(1, horizon + 1):
            first = count == 1
            rising1 = np.ones(n, dtype=bool) if first else h_prev1 < h_cur
            over = active & (cur[:, 2] > params.guard)
            verdict[over & rising1] = kernels.ESCAPING
            step[over & rising1] = k
            active &= ~over
            nxt = cur.copy()
            if np.any(active):
                nxt[active] = _eval_unchecked(params, cur[active])
            bad = active & ~np.all(np.isfinite(nxt), axis=1)
            verdict[bad & rising1] = kernels.ESCAPING
            step[bad & rising1] = k
            active &= ~bad
            cur = np.where(active[:, None], nxt, cur)
            h_prev2 = np.where(active, h_prev1, h_prev2)
            h_prev1 = np.where(active, h_cur, h_prev1)
            h_cur = np.where(active, cur[:, 2], h_cur)
            count += 1
            out = active & (np.linalg.norm(cur, axis=1) > radius)
            exceeded |= out
            if count == 2:
                rising = h_prev1 < h_cur
            else:
                rising = (h_prev2 < h_prev1) & (h_prev1 < h_cur)
            esc = out & rising
            verdict[esc] = kernels.ESCAPING
            step[esc] = k
            active &= ~esc
        ok = active & ~exceeded & (np.linalg.norm(cur, axis=1) <= box)
    verdict[ok] = kernels.BOUNDED
    return verdict, step, cur[:, 2].copy()


# ---------------------------------------------------------------------------
# periodic points


class PeriodicResult(NamedTuple):
    """Periodic point found by pulling back along a word.

    ``residual`` is the forward defect ``|Z^N(x_star) - x_star|``;
    ``pullback_residual`` the defect of the composed inverse branches.
    """

    x_star: np.ndarray
    residual: float
    pullback_residual: float
    rounds: int
    method: str


def _default_seed(params: MapParams, first) -> np.ndarray:
    """High point on the vertical axis if the closed diamond touches it, else above the diamond center."""
    i, j = first
    lam = params.lam
    height = 1.0 + math.log1p(lam) + abs(math.log(params.nu * lam))
    if i in (-1, 0) and j in (-1, 0):
        return np.array([0.0, 0.0, height])
    d = 2 * lam * j + lam
    s = 2 * lam * i + lam
    return np.array([(s + d) / 2.0, (s - d) / 2.0, height])


def forward_defect(params: MapParams, x, n: int) -> float:
    """``|Z^n(x) - x|``, or ``inf`` if an iterate overflows."""
    x = _as_array(x, 3, "x").reshape(3)
    pts, truncated = _orbit_points(params, x, n + 1)
    if truncated:
        return math.inf
    return float(np.linalg.norm(pts[-1] - x))


def periodic_point(
    params: MapParams,
    symbols: Sequence,
    tol: float = 1e-12,
    max_rounds: int = 2000,
    seed_point=None,
) -> PeriodicResult:
    """Periodic point with itinerary ``symbols`` repeated.

    Iterates ``F = Lambda_{w_0} o ... o Lambda_{w_{N-1}}`` from the seed
    until ``|F(x) - x| < tol``. When the fixed-point iteration stalls (ratio
    of successive defects close to one, as at a parabolic point) it switches
    to Newton's method on ``F(x) - x`` with a finite-difference Jacobian.

    Parameters
    ----------
    symbols : sequence of BeamIndex
        Diamond indices ``w_0, ..., w_{N-1}``; the word must be cyclically
        admissible.
    seed_point : array_like, optional
        Starting point; defaults to the center of ``T_{w_0}`` at height 1.

    Raises
    ------
    InadmissibleError
        For a word that is not cyclically admissible, or when a branch is
        undefined along the way; carries the failing step.
    ConvergenceError
        When ``max_rounds`` is exhausted; carries the last defect and point.
    """
    word = [BeamIndex(*w) for w in symbols]
    if not word:
        raise DomainError("empty word")
    bad = word_admissible(word, cyclic=True)
    if bad is not None:
        raise InadmissibleError(f"beam {tuple(word[(bad + 1) % len(word)])} does not lie in the image of {tuple(word[bad])}", bad)
    x = _default_seed(params, word[0]) if seed_point is None else _as_array(seed_point, 3, "seed_point").reshape(3)

    def F(p):
        return pullback_orbit(params, word, p)[0]

    prev = math.inf
    defect = math.inf
    stalled = 0
    method = "fixed-point"
    rounds = 0
    while rounds < max_rounds:
        rounds += 1
        nxt = F(x)
        defect = float(np.linalg.norm(nxt - x))
        x = nxt
        if defect < tol:
            return _finish(params, word, x, defect, rounds, method)
        stalled = stalled + 1 if defect > 0.9 * prev else 0
        prev = defect
        if stalled >= 10:
            method = "newton"
            break
    if method == "newton":
        while rounds < max_rounds:
            rounds += 1
            x, defect = _newton_step(F, x, defect)
            if defect < tol:
                return _finish(params, word, x, defect, rounds, method)
    raise ConvergenceError(f"no convergence in {max_rounds} rounds", defect, x)


def _newton_step(F, x: np.ndarray, defect: float) -> tuple[np.ndarray, float]:
    g0 = F(x) - x
    h = 1e-7 * max(1.0, float(np.linalg.norm(x)))
    J = np.empty((3, 3))

    def G(p):
        try:
            return F(p) - p
        except (InadmissibleError, DomainError):
            return None

    # the point may sit on the edge of a closed wedge, or at its apex on the
    # axis; the diagonal directions always have one side inside the wedge
    r = 1.0 / math.sqrt(2.0)
    bases = (np.eye(3), np.array([[r, r, 0.0], [r, -r, 0.0], [0.0, 0.0, 1.0]]).T)
    for basis in bases:
        cols = []
        for k in range(3):
            e = h * basis[:, k]
            gp, gm = G(x + e), G(x - e)
            if gp is not None and gm is not None:
                cols.append((gp - gm) / (2 * h))
            elif gp is not None:
                cols.append((gp - g0) / h)
            elif gm is not None:
                cols.append((g0 - gm) / h)
            else:
                break
        if len(cols) == 3:
            J = np.column_stack(cols) @ basis.T
            break
    else:
        raise InadmissibleError("no difference stencil stays inside the branch domains", 0)
    try:
        delta = np.linalg.solve(J, -g0)
    except np.linalg.LinAlgError:
        delta = np.linalg.lstsq(J, -g0, rcond=None)[0]
    t = 1.0
    best = (x, float(np.linalg.norm(g0)))
    for _ in range(30):
        cand = x + t * delta
        try:
            val = float(np.linalg.norm(F(cand) - cand))
        except (InadmissibleError, DomainError):
            val = math.inf
        if val < best[1]:
            return cand, val
        t *= 0.5
    # no descent: fall back to one plain fixed-point step
    nxt = F(x)
    return nxt, float(np.linalg.norm(F(nxt) - nxt))


def _finish(params, word, x, defect, rounds, method) -> PeriodicResult:
    return PeriodicResult(x, forward_defect(params, x, len(word)), defect, rounds, method)


# ---------------------------------------------------------------------------
# curves of the escaping set


class CurveSet(NamedTuple):
    """Polylines ``gamma_0, ..., gamma_kmax`` and the number of dropped samples per level."""

    curves: list
    dropped: list


def inverse_T0_many(params: MapParams, y: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Vectorized inverse branch into the closed diamond ``T_(0,0)``.

    Returns the preimages and a mask of samples that actually land in the
    closed diamond (the others are outside its image half-space).
    """
    y = np.asarray(y, dtype=float).reshape(-1, 3)
    out = np.full_like(y, np.nan)
    upper = y[:, 2] >= 0
    for mask, cell in ((upper, (0, 0)), (~upper, (1, 0))):
        if np.any(mask):
            out[mask] = square_branch_inverse(params, y[mask], cell)
    lam = params.lam
    tol = 1e-9 * np.maximum(lam, np.linalg.norm(out[:, :2], axis=1))
    d = out[:, 0] - out[:, 1]
    s = out[:, 0] + out[:, 1]
    ok = (d >= -tol) & (d <= 2 * lam + tol) & (s >= -tol) & (s <= 2 * lam + tol)
    return out, ok


def gamma_k_curves(
    params: MapParams, k_max: int, n_points: int, s_range: tuple[float, float] = (-6.0, 6.0)
) -> CurveSet:
    """Curves ``gamma_0 = {(0, 0, t): t < 0}`` and ``gamma_k = Lambda_0(gamma_{k-1})``.

    ``gamma_0`` is sampled at ``t = -exp(s)`` for ``n_points`` equally spaced
    ``s``; each later curve is the image of the previous vertices under the
    inverse branch into ``T_(0,0)``. Vertices whose preimage falls outside
    the closed diamond are dropped and counted.
    """
    if k_max < 1:
        raise DomainError("k_max must be at least 1")
    if n_points < 2:
        raise DomainError("n_points must be at least 2")
    s = np.linspace(s_range[0], s_range[1], n_points)
    cur = np.column_stack([np.zeros(n_points), np.zeros(n_points), -np.exp(s)])
    curves = [cur]
    dropped = [0]
    for _ in range(k_max):
        nxt, ok = inverse_T0_many(params, cur)
        dropped.append(int(np.count_nonzero(~ok)))
        cur = nxt[ok]
        curves.append(cur)
    return CurveSet(curves, dropped)


# ---------------------------------------------------------------------------
# grid observations


@dataclass(frozen=True)
class ComponentReport:
    """Connected components of grid points classified as escaping.

    Finite-horizon grid connectivity is an observation only: it neither
    proves nor refutes connectivity of the escaping set.
    """

    n_points: int
    n_escaping: int
    sizes: tuple
    resolution: int
    horizon: int
    label: str = "observational: finite-horizon grid connectivity"

    @property
    def count(self) -> int:
        return len(self.sizes)

    @property
    def dominant_fraction(self) -> float:
        return self.sizes[0] / self.n_escaping if self.sizes else 0.0

    def to_record(self) -> dict:
        return {
            "label": self.label,
            "resolution": self.resolution,
            "horizon": self.horizon,
            "n_points": self.n_points,
            "n_escaping": self.n_escaping,
            "components": self.count,
            "dominant_fraction": self.dominant_fraction,
            "sizes": list(self.sizes[:20]),
        }


def grid_points(box: Sequence[float], resolution: int) -> np.ndarray:
    """Cell-centered grid of ``resolution^3`` points in ``box = (x1lo, x1hi, x2lo, x2hi, x3lo, x3hi)``."""
    axes = []
    for lo, hi in zip(box[0::2], box[1::2]):
        if not hi > lo:
            raise DomainError("box must have positive extent")
        step = (hi - lo) / resolution
        axes.append(lo + (np.arange(resolution) + 0.5) * step)
    g = np.meshgrid(*axes, indexing="ij")
    return np.stack(g, axis=-1)


def escaping_grid_components(
    params: MapParams,
    box: Sequence[float],
    resolution: int,
    horizon: int = HORIZON,
    escape_radius: float = ESCAPE_RADIUS,
) -> ComponentReport:
    """Classify a voxel grid and count 26-connected components of escaping voxels."""
    if resolution < 8:
        raise DomainError("resolution must be at least 8")
    pts = grid_points(box, resolution)
    verdict, _, _ = classify_points(params, pts.reshape(-1, 3), horizon, escape_radius)
    mask = (verdict == kernels.ESCAPING).reshape(pts.shape[:3])
    labels = kernels.label_components_26(mask)
    _, sizes = np.unique(labels[mask], return_counts=True)
    sizes = tuple(int(v) for v in sorted(sizes, reverse=True))
    return ComponentReport(int(mask.size), int(mask.sum()), sizes, resolution, horizon)


class LambdaCloud(NamedTuple):
    """Grid points of the closed rectangle ``B_(0,0)`` whose iterates stay in it."""

    points: np.ndarray
    n_grid: int
    n_overflow: int


def lambda_Z_approx(
    params: MapParams,
    horizon: int,
    n_d: int = 64,
    n_s: int = 64,
    heights: tuple[float, float] = (-4.0, 4.0),
    n_h: int = 64,
) -> LambdaCloud:
    """Finite-horizon approximation of the points whose orbits never leave the closed ``B_(0,0)``.

    The grid is uniform in ``d in [0, 2*lam]``, ``s in [-2*lam, 2*lam]`` and
    height. A point is kept when ``Z^k(x)`` lies in the closed rectangle
    for ``k = 1, ..., horizon``; points whose orbit overflows are dropped
    and counted.
    """
    if horizon < 0:
        raise DomainError("horizon must be nonnegative")
    lam = params.lam
    d, s, h = np.meshgrid(
        np.linspace(0.0, 2 * lam, n_d), np.linspace(-2 * lam, 2 * lam, n_s), np.linspace(*heights, n_h), indexing="ij"
    )
    pts = np.column_stack([((s + d) / 2).ravel(), ((s - d) / 2).ravel(), h.ravel()])
    keep = np.ones(len(pts), dtype=bool)
    cur = pts.copy()
    overflow = 0
    for _ in range(horizon):
        over = keep & (cur[:, 2] > params.guard)
        overflow += int(over.sum())
        keep &= ~over
        if not np.any(keep):
            break
        cur[keep] = _eval_unchecked(params, cur[keep])
        tol = 1e-12 * np.maximum(lam, np.abs(cur[:, :2]).max(axis=1))
        keep &= in_closed_B00(cur, lam, tol)
    return LambdaCloud(pts[keep], len(pts), overflow)


def word_in_closed_beams(params: MapParams, x, word: Sequence, repeats: int = 1, tol: float = 1e-9) -> bool:
    """Whether ``Z^k(x)`` lies in the closed diamond ``word[k mod N]`` for ``k < repeats*N``."""
    n = len(word) * repeats
    pts, truncated = _orbit_points(params, _as_array(x, 3, "x").reshape(3), n)
    if truncated:
        return False
    scale = params.lam
    return all(in_beam(p, word[k % len(word)], params.lam, tol * max(scale, float(np.abs(p[:2]).max()))) for k, p in enumerate(pts))
