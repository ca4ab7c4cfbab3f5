"""The Zorich map on all of space, its Jacobian, and the 1D exponential family."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .config import ESCAPE_RADIUS, GUARD
from .errors import DomainError, OverflowGuardError, SeamError
from .geometry import MapParams, _as_array, fold_plane, seam_distance, smooth_piece


def _eval_unchecked(params: MapParams, x: np.ndarray) -> np.ndarray:
    u, parity = fold_plane(x[..., :2], params.lam)
    h = params.face.eval(u, params.lam)
    scale = params.nu * np.exp(x[..., 2])
    sign = 1.0 - 2.0 * np.asarray(parity, dtype=float)
    return np.stack([scale * h[..., 0], scale * h[..., 1], scale * (sign * h[..., 2])], axis=-1)


def zorich_eval(params: MapParams, x) -> np.ndarray:
    """Evaluate ``Z(x) = nu * exp(x3) * (h1(u), h2(u), (-1)^parity * h3(u))``.

    ``(u, parity)`` is the fold of ``(x1, x2)`` into ``lam*Q``. Accepts a
    single point or an array of points with trailing dimension 3.

    Raises
    ------
    OverflowGuardError
        If any height exceeds ``params.guard``.
    DomainError
        On non-finite input.
    """
    x = _as_array(x, 3, "x")
    top = np.max(x[..., 2])
    if top > params.guard:
        raise OverflowGuardError(float(top), params.guard)
    return _eval_unchecked(params, x)


@dataclass
class OrbitTrace:
    """Finite orbit ``x, Z(x), Z^2(x), ...``.

    Attributes
    ----------
    points : ndarray, shape (k, 3)
    heights : ndarray, shape (k,)
    parities : ndarray, shape (k,)
        Fold parity of each point's cell.
    stop : str
        ``"horizon"``, ``"escape_radius"`` or ``"overflow"``.
    """

    points: np.ndarray
    heights: np.ndarray = field(init=False)
    parities: np.ndarray = field(init=False)
    stop: str = "horizon"
    lam: float = 1.0

    def __post_init__(self):
        self.points = np.asarray(self.points, dtype=float).reshape(-1, 3)
        self.points.setflags(write=False)
        self.heights = self.points[:, 2]
        self.parities = np.asarray(fold_plane(self.points[:, :2], self.lam).parity)

    @property
    def truncated(self) -> bool:
        return self.stop != "horizon"

    def __len__(self) -> int:
        return len(self.points)


def zorich_iterate(params: MapParams, x, n: int, escape_radius: float = ESCAPE_RADIUS) -> OrbitTrace:
    """Orbit of ``x`` under ``n`` iterations.

    Stops early, keeping the offending point, once ``|Z^k(x)| > escape_radius``;
    stops before a step whose height exceeds the overflow guard.
    """
    if n < 0:
        raise DomainError("n must be nonnegative")
    cur = _as_array(x, 3, "x").reshape(3)
    points = [cur]
    stop = "horizon"
    for _ in range(n):
        if cur[2] > params.guard:
            stop = "overflow"
            break
        cur = _eval_unchecked(params, cur)
        points.append(cur)
        if np.linalg.norm(cur) > escape_radius:
            stop = "escape_radius"
            break
    return OrbitTrace(np.array(points), stop=stop, lam=params.lam)


@dataclass(frozen=True)
class Jacobian:
    """Finite-difference Jacobian of ``Z`` at a point.

    The map satisfies ``DZ(x) = exp(x3) * DZ(x1, x2, 0)``, so the matrix is
    stored at height zero and scaled on demand; log-determinants stay finite
    at any height.
    """

    base: np.ndarray
    height: float

    @property
    def matrix(self) -> np.ndarray:
        return np.exp(self.height) * self.base

    @property
    def det(self) -> float:
        sign, logdet = np.linalg.slogdet(self.base)
        total = logdet + 3.0 * self.height
        return float(sign * math.exp(total)) if total < 709 else float(sign * math.inf)

    @property
    def log_abs_det(self) -> float:
        sign, logdet = np.linalg.slogdet(self.base)
        return float(logdet + 3.0 * self.height) if sign != 0 else -math.inf

    @property
    def sign(self) -> float:
        return float(np.linalg.slogdet(self.base)[0])

    @property
    def op_norm(self) -> float:
        """Largest singular value."""
        return float(np.linalg.norm(self.base, 2) * math.exp(self.height))


def jacobian_fd(params: MapParams, x, step: float | None = None, mode: str = "central") -> Jacobian:
    """Finite-difference Jacobian of ``Z`` at ``x``.

    Parameters
    ----------
    step : float, optional
        Difference step; defaults to ``1e-5 * max(1, |(x1, x2)|)``. The
        height does not enter the default because the Jacobian is formed at
        height zero and rescaled.
    mode : {"central", "one-sided"}
        Central differences refuse points within ``2*step`` of a seam.
        One-sided mode uses a second-order one-sided stencil on whichever side
        stays inside the smooth piece containing ``x``.

    Raises
    ------
    SeamError
        If a central stencil would cross a seam, or no one-sided stencil fits.
    """
    x = _as_array(x, 3, "x").reshape(3)
    p = x[:2]
    if step is None:
        step = 1e-5 * max(1.0, float(np.linalg.norm(p)))
    if step <= 0:
        raise DomainError("step must be positive")
    base_pt = np.array([p[0], p[1], 0.0])
    cols = []
    if mode == "central":
        if float(seam_distance(p, params.lam)) <= 2.0 * step:
            raise SeamError("point within 2*step of a seam; shrink step or use mode='one-sided'")
        for i in range(3):
            e = np.zeros(3)
            e[i] = step
            cols.append((_eval_unchecked(params, base_pt + e) - _eval_unchecked(params, base_pt - e)) / (2.0 * step))
    elif mode == "one-sided":
        piece = smooth_piece(p, params.lam)
        f0 = _eval_unchecked(params, base_pt)
        for i in range(3):
            e = np.zeros(3)
            e[i] = step
            for sgn in (1.0, -1.0):
                if i == 2 or (
                    smooth_piece(p + sgn * e[:2], params.lam) == piece
                    and smooth_piece(p + 2 * sgn * e[:2], params.lam) == piece
                ):
                    f1 = _eval_unchecked(params, base_pt + sgn * e)
                    f2 = _eval_unchecked(params, base_pt + 2 * sgn * e)
                    cols.append(sgn * (-3.0 * f0 + 4.0 * f1 - f2) / (2.0 * step))
                    break
            else:
                raise SeamError("no one-sided stencil fits inside the smooth piece; shrink step")
    else:
        raise DomainError(f"unknown mode {mode!r}")
    return Jacobian(np.column_stack(cols), float(x[2]))


def jacobian_fd_batch(params: MapParams, x, step=None) -> tuple[np.ndarray, np.ndarray]:
    """Central-difference Jacobians at height zero for many points at once.

    Returns
    -------
    base : ndarray, shape (n, 3, 3)
        ``DZ(x1, x2, 0)``; multiply by ``exp(x3)`` for ``DZ(x)``.
    seam_ok : ndarray of bool, shape (n,)
        False where the stencil would cross a seam (those rows are unreliable).
    """
    x = _as_array(x, 3, "x").reshape(-1, 3)
    p = x[:, :2]
    if step is None:
        step = 1e-5 * np.maximum(1.0, np.linalg.norm(p, axis=-1))
    step = np.broadcast_to(np.asarray(step, dtype=float), (len(x),))
    seam_ok = seam_distance(p, params.lam) > 2.0 * step
    base_pt = np.column_stack([p, np.zeros(len(x))])
    base = np.empty((len(x), 3, 3))
    for i in range(3):
        e = np.zeros((len(x), 3))
        e[:, i] = step
        diff = _eval_unchecked(params, base_pt + e) - _eval_unchecked(params, base_pt - e)
        base[:, :, i] = diff / (2.0 * step)[:, None]
    return base, seam_ok


@dataclass(frozen=True)
class ExpFamily:
    """The exponential map ``t -> kappa * exp(t)``."""

    kappa: float

    def __post_init__(self):
        if not self.kappa > 0:
            raise DomainError("kappa must be positive")

    def __call__(self, t):
        return self.kappa * np.exp(t)


def exp_iter(family: ExpFamily, t: float, n: int, guard: float = GUARD) -> tuple[np.ndarray, bool]:
    """Orbit ``t, E(t), ..., E^n(t)``.

    Returns
    -------
    values : ndarray
        The orbit, truncated before the first value whose exponential would
        exceed the guard.
    truncated : bool
        Whether the orbit was cut short.
    """
    if n < 0:
        raise DomainError("n must be nonnegative")
    values = [float(t)]
    for _ in range(n):
        if values[-1] > guard:
            return np.array(values), True
        values.append(family.kappa * math.exp(values[-1]))
    return np.array(values), False


def log_exp_iter(family: ExpFamily, t: float, n: int) -> np.ndarray:
    """Logarithms ``log E^k(t)`` for ``k = 1..n``, valid far beyond overflow.

    Uses ``log E^{k+1}(t) = log kappa + E^k(t)`` with ``E^k(t) = exp(log E^k)``;
    entries become ``inf`` once ``E^k(t)`` itself overflows.
    """
    out = np.empty(n)
    cur = float(t)
    lk = math.log(family.kappa)
    for k in range(n):
        out[k] = lk + cur
        cur = math.exp(out[k]) if out[k] < 709 else math.inf
    return out
