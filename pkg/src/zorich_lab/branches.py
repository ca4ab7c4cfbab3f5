"""Inverse branches of the Zorich map, contraction estimates and orbit pullback.

Beams here are the square prisms ``T_(i,j)`` of the diagonal grid cut out by
the planes ``x1 = +-x2 + 2*lam*k``. In the rotated coordinates
``d = x1 - x2`` and ``s = x1 + x2``::

    T_(i,j) = {2*lam*j < d < 2*lam*(j+1), 2*lam*i < s < 2*lam*(i+1)} x R

so ``T_(0,0)`` is the prism over the diamond with vertices ``(0,0)``,
``(lam,-lam)``, ``(2*lam,0)``, ``(lam,lam)``. The map sends each such beam
bijectively onto one of the four wedges

    H0 = {x1 > |x2|}, H1 = {x2 > |x1|}, H2 = {x1 < -|x2|}, H3 = {x2 < -|x1|}.
"""

from __future__ import annotations

import math
from typing import NamedTuple, Sequence

import numpy as np

from .errors import DomainError, InadmissibleError
from .geometry import MapParams, _as_array
from .zorich import _eval_unchecked

WEDGE_NAMES = ("H0 = {x1 > |x2|}", "H1 = {x2 > |x1|}", "H2 = {x1 < -|x2|}", "H3 = {x2 < -|x1|}")
_DIRECTION_WEDGE = {(1, 0): 0, (0, 1): 1, (-1, 0): 2, (0, -1): 3}


class BeamIndex(NamedTuple):
    """Index ``(i, j)`` of the beam ``T_(0,0) + i*(lam, lam, 0) + j*(lam, -lam, 0)``."""

    i: int
    j: int


def wedge_of(y) -> int:
    """Index of the closed wedge containing ``(y1, y2)`` (ties go to the lower index)."""
    y1, y2 = float(y[0]), float(y[1])
    if y1 >= abs(y2):
        return 0
    if y2 >= abs(y1):
        return 1
    if -y1 >= abs(y2):
        return 2
    return 3


def domain_wedge(beam) -> int:
    """Wedge ``H_p`` that contains the beam itself."""
    i, j = beam
    if j >= 0:
        return 0 if i >= 0 else 3
    return 1 if i >= 0 else 2


def _beam_cells(beam) -> tuple[tuple[int, int], tuple[int, int]]:
    """The two fold cells ``(even, odd)`` whose centers are opposite diamond vertices."""
    i, j = beam
    if (i + j) % 2 == 0:
        a = ((i + j) // 2, (i - j) // 2)
        b = (a[0] + 1, a[1])
    else:
        a = ((i + j + 1) // 2, (i - j + 1) // 2)
        b = (a[0], a[1] - 1)
    return (a, b) if (a[0] + a[1]) % 2 == 0 else (b, a)


def image_wedge(beam) -> int:
    """Wedge ``H_p`` onto which the map sends the beam."""
    i, j = beam
    even, _ = _beam_cells(beam)
    mid = (i + j + 1, i - j)  # diamond center in units of lam
    delta = (mid[0] - 2 * even[0], mid[1] - 2 * even[1])
    direction = (delta[0] * (-1) ** even[0], delta[1] * (-1) ** even[1])
    return _DIRECTION_WEDGE[direction]


def in_beam(x, beam, lam: float, tol: float = 0.0) -> bool:
    """Membership of ``x`` in the closed beam, with absolute slack ``tol``."""
    i, j = beam
    d = float(x[0]) - float(x[1])
    s = float(x[0]) + float(x[1])
    return (
        2 * lam * j - tol <= d <= 2 * lam * (j + 1) + tol and 2 * lam * i - tol <= s <= 2 * lam * (i + 1) + tol
    )


def _invert_direction(params: MapParams, y: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Folded point ``u`` and height ``x3`` with ``Z`` sending ``(u, x3)`` onto ``(y1, y2, |y3|)``."""
    w = np.stack([y[..., 0], y[..., 1], np.abs(y[..., 2])], axis=-1)
    u = params.face.invert_ray(w, params.lam)
    hnorm = np.linalg.norm(params.face.eval(u, params.lam), axis=-1)
    x3 = np.log(np.linalg.norm(y, axis=-1) / (params.nu * hnorm))
    return u, x3


def _place(u: np.ndarray, cell, lam: float) -> np.ndarray:
    r1, r2 = cell
    return np.stack(
        [2 * lam * r1 + (-1) ** (r1 % 2) * u[..., 0], 2 * lam * r2 + (-1) ** (r2 % 2) * u[..., 1]], axis=-1
    )


def square_branch_inverse(params: MapParams, y, cell=(0, 0)) -> np.ndarray:
    """Inverse branch of ``Z`` into the square prism ``P(r1, r2) x R``.

    The prism over the fold cell centered at ``2*lam*(r1, r2)`` maps onto
    the upper half-space when ``r1 + r2`` is even and onto the lower one
    otherwise. Vectorized over leading axes of ``y``.
    """
    y = _as_array(y, 3, "y")
    even = (cell[0] + cell[1]) % 2 == 0
    if np.any(np.linalg.norm(y, axis=-1) == 0):
        raise DomainError("the origin has no preimage")
    if (even and np.any(y[..., 2] < 0)) or (not even and np.any(y[..., 2] > 0)):
        raise DomainError(f"cell {tuple(cell)} maps onto the {'upper' if even else 'lower'} half-space")
    u, x3 = _invert_direction(params, y)
    xy = _place(u, cell, params.lam)
    return np.concatenate([xy, x3[..., None]], axis=-1)


def branch_inverse(params: MapParams, beam, y) -> np.ndarray:
    """Inverse branch of ``Z`` into the closed beam ``T_(i,j)``.

    Parameters
    ----------
    params : MapParams
    beam : BeamIndex or tuple of int
    y : array_like, shape (3,)
        Nonzero point of the closed image wedge of the beam.

    Returns
    -------
    ndarray, shape (3,)
        The unique ``x`` in the closed beam with ``Z(x) = y``.

    Raises
    ------
    DomainError
        If ``y = 0`` or ``y`` lies outside the beam's image wedge.
    """
    y = _as_array(y, 3, "y").reshape(3)
    if not np.any(y):
        raise DomainError("the origin has no preimage")
    even, odd = _beam_cells(beam)
    cell = odd if y[2] < 0 else even
    u, x3 = _invert_direction(params, y)
    xy = _place(u, cell, params.lam)
    tol = 1e-9 * max(params.lam, float(np.linalg.norm(xy)))
    if not in_beam(xy, beam, params.lam, tol):
        p = image_wedge(beam)
        raise DomainError(f"beam {tuple(beam)} maps onto {WEDGE_NAMES[p]}; y lies in {WEDGE_NAMES[wedge_of(y)]}")
    return np.array([xy[0], xy[1], float(x3)])


def pullback_orbit(params: MapParams, symbols: Sequence, y) -> list[np.ndarray]:
    """Pull ``y`` back along a symbol sequence.

    Returns ``[x_0, ..., x_N]`` with ``x_N = y`` and
    ``x_k = Lambda_{symbols[k]}(x_{k+1})``, so ``Z(x_k) = x_{k+1}``.

    Raises
    ------
    InadmissibleError
        Carrying the index ``k`` of the first symbol whose branch is undefined
        at ``x_{k+1}``.
    """
    pts = [_as_array(y, 3, "y").reshape(3)]
    for k in range(len(symbols) - 1, -1, -1):
        try:
            pts.append(branch_inverse(params, symbols[k], pts[-1]))
        except DomainError as exc:
            raise InadmissibleError(f"step {k}: {exc}", k) from exc
    return pts[::-1]


def word_admissible(word: Sequence, cyclic: bool = True) -> int | None:
    """First index ``k`` where ``beam k+1`` is not inside the image of ``beam k``.

    Returns ``None`` when the (cyclic) word is admissible.
    """
    n = len(word)
    last = n if cyclic else n - 1
    for k in range(last):
        if domain_wedge(word[(k + 1) % n]) != image_wedge(word[k]):
            return k
    return None


# ---------------------------------------------------------------------------
# contraction of the branch into P(0,0) at large heights


class ContractionEstimate(NamedTuple):
    alpha_hat: float
    threshold: float
    worst_pair: tuple


def _standard_pairs(n: int, seed: int) -> tuple[np.ndarray, np.ndarray]:
    """Nested pairs in ``{xi3 > 1}``, in units of the height threshold."""
    a = np.random.default_rng(seed).random((n, 7))
    xi = np.column_stack([8.0 * a[:, 0] - 4.0, 8.0 * a[:, 1] - 4.0, 1.0 + 4.0 * a[:, 2] ** 2])
    z = 2.0 * a[:, 3] - 1.0
    phi = 2.0 * np.pi * a[:, 4]
    rho = np.sqrt(1.0 - z * z)
    direction = np.column_stack([rho * np.cos(phi), rho * np.sin(phi), z])
    delta = 10.0 ** (-6.0 + 6.5 * a[:, 5])
    near_pole = a[:, 6] < 0.1  # the supremum sits near the axis just above the threshold
    xi[near_pole, :2] *= 1e-3
    xi[near_pole, 2] = 1.0 + 1e-3 * a[near_pole, 2]
    eta = xi + delta[:, None] * direction
    eta[:, 2] = np.where(eta[:, 2] <= 1.0, 2.0 - eta[:, 2], eta[:, 2])
    return xi, eta


def estimate_contraction(params: MapParams, M: float, n_pairs: int, seed: int = 0) -> ContractionEstimate:
    """Sampled Lipschitz constant of ``Lambda_(0,0)`` on ``{x3 > nu*lam*exp(M)}``.

    Pairs are drawn in units of the threshold ``c``: the ratio is exactly
    proportional to ``1/c`` under this scaling, so for nested samples the
    estimate is nonincreasing in ``M``.
    """
    if n_pairs < 1:
        raise DomainError("need at least one pair")
    c = params.kappa * math.exp(M)
    xi, eta = _standard_pairs(n_pairs, seed)
    x, y = c * xi, c * eta
    dist = np.linalg.norm(x - y, axis=-1)
    keep = dist > 0
    lx = square_branch_inverse(params, x[keep])
    ly = square_branch_inverse(params, y[keep])
    ratio = np.linalg.norm(lx - ly, axis=-1) / dist[keep]
    k = int(np.argmax(ratio))
    return ContractionEstimate(float(ratio[k]), c, (x[keep][k].tolist(), y[keep][k].tolist()))


def find_M0(
    params: MapParams, n_pairs: int = 20000, seed: int = 0, target: float = 0.95, step: float = 0.5, M_max: float = 50.0
) -> tuple[float, float]:
    """Smallest ``M`` on the grid ``0, step, 2*step, ...`` with estimated contraction below ``target``."""
    M = 0.0
    while M <= M_max:
        est = estimate_contraction(params, M, n_pairs, seed)
        if est.alpha_hat < target:
            return M, est.alpha_hat
        M += step
    raise DomainError(f"no contraction below {target} for M <= {M_max}")


class BallCheck(NamedTuple):
    n_checked: int
    failures: int
    worst_ratio: float
    worst_triple: tuple | None


def check_ball_expansion(
    params: MapParams, M: float, alpha: float, n_triples: int, seed: int = 0
) -> BallCheck:
    """Sampled check that ``Z(B(x, R))`` covers ``B(Z(x), R/alpha)`` high up.

    Equivalently, for ``y`` in ``B(Z(x), R/alpha)`` above the threshold,
    ``Lambda_(0,0)(y)`` lies in ``B(x, R)``. Reports ``|Lambda(y) - x| / R``.
    """
    c = params.kappa * math.exp(M)
    rng = np.random.default_rng(seed)
    failures = 0
    worst = 0.0
    worst_triple = None
    checked = 0
    while checked < n_triples:
        a = rng.random(9)
        y0 = c * np.array([8.0 * a[0] - 4.0, 8.0 * a[1] - 4.0, 1.0 + 4.0 * a[2] ** 2])
        R = c * 10.0 ** (-4.0 + 4.5 * a[3])
        z = 2.0 * a[4] - 1.0
        rho = math.sqrt(1.0 - z * z)
        direction = np.array([rho * math.cos(2 * math.pi * a[5]), rho * math.sin(2 * math.pi * a[5]), z])
        y = y0 + (R / alpha) * a[6] ** (1.0 / 3.0) * direction
        if y[2] <= c:
            continue
        x = square_branch_inverse(params, y0)
        ratio = float(np.linalg.norm(square_branch_inverse(params, y) - x) / R)
        checked += 1
        if ratio >= 1.0:
            failures += 1
        if ratio > worst:
            worst = ratio
            worst_triple = (x.tolist(), R, y.tolist())
    return BallCheck(checked, failures, worst, worst_triple)


def forward_residual(params: MapParams, x, y) -> float:
    """Relative residual ``|Z(x) - y| / |y|``."""
    zx = _eval_unchecked(params, _as_array(x, 3, "x"))
    return float(np.linalg.norm(zx - np.asarray(y)) / max(np.linalg.norm(y), 1e-300))
