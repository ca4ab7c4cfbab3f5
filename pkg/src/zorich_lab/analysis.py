"""Numerical checks of the quantitative bounds satisfied by Zorich maps.

Each verifier returns a :class:`CheckResult` holding the two sides of an
inequality, whether it holds, and the worst sampled point. Bounds that involve
the bi-Lipschitz constant ``L`` of the face use the sampled estimate
``face.L_hat`` unless another value is passed.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field
from typing import Any

import numpy as np

from .errors import DomainError, RegimeError, SeamError
from .geometry import MapParams, estimate_bilipschitz, seam_distance
from .zorich import ExpFamily, _eval_unchecked, exp_iter, jacobian_fd

SLACK = 1e-3


@dataclass
class CheckResult:
    """Outcome of one inequality check ``lhs >= rhs`` (or ``<=``, see ``relation``)."""

    check: str
    params: dict
    lhs: float
    rhs: float
    ok: bool
    worst_point: Any = None
    relation: str = ">="
    extra: dict = field(default_factory=dict)

    def to_record(self) -> dict:
        rec = asdict(self)
        for key in ("lhs", "rhs"):
            v = rec[key]
            if isinstance(v, float) and not math.isfinite(v):
                rec[key] = str(v)
        return rec


# ---------------------------------------------------------------------------
# regime


@dataclass
class RegimeReport:
    """Face constants and the parameter thresholds they induce.

    Verdicts compare ``lambda`` with ``L^5``, ``nu`` with ``sqrt(2L/lambda)``,
    ``nu*lambda`` with ``1/e`` (escape along the axis) and ``lambda`` with
    ``C = max(L^5, 2L) / (min|f| * sin(theta))`` for general faces.
    """

    face: str
    L_hat: float
    ell_hat: float
    L_upper: float
    theta_hat: float
    min_norm: float
    lam: float
    nu: float
    L5: float
    nu_threshold: float
    kappa: float
    C_hgen: float
    verdicts: dict

    def to_record(self) -> dict:
        return asdict(self)


def regime_report(params: MapParams, face=None) -> RegimeReport:
    """Evaluate every parameter threshold with the estimated face constants."""
    face = params.face if face is None else face
    L = face.L_hat
    theta = face.theta_S
    L5 = L**5
    nu_thr = math.sqrt(2.0 * L / params.lam)
    C = max(L5, 2.0 * L) / (face.min_norm * math.sin(theta))
    kappa = params.kappa
    verdicts = {
        "lambda_gt_L5": params.lam > L5,
        "nu_gt_sqrt_2L_over_lambda": params.nu > nu_thr,
        "kappa_gt_inv_e": kappa > math.exp(-1.0),
        "lambda_gt_C_hgen": params.lam > C,
    }
    verdicts["large_lambda_regime"] = verdicts["lambda_gt_L5"] and verdicts["nu_gt_sqrt_2L_over_lambda"]
    return RegimeReport(
        face.kind, L, face.ell_hat, face.lipschitz[0], theta, face.min_norm, params.lam, params.nu, L5, nu_thr, kappa, C, verdicts
    )


# ---------------------------------------------------------------------------
# determinant bounds


def single_det_coefficient(params: MapParams, L: float | None = None) -> float:
    """``c`` in ``det DZ(x) >= c * exp(3*x3)``.

    Spherical face: ``nu^3 * lam / L^2``; other faces pick up the factor
    ``min|f| * sin(theta)``.
    """
    face = params.face
    L = face.L_hat if L is None else L
    coeff = params.nu**3 * params.lam / L**2
    if face.kind != "sphere":
        coeff *= face.min_norm * math.sin(face.theta_S)
    return coeff


def verify_single_det(params: MapParams, x, L: float | None = None, step: float | None = None) -> CheckResult:
    """Check ``det DZ(x) >= nu^3 * exp(3*x3) * lam / L^2`` at one point (in logs)."""
    x = np.asarray(x, dtype=float)
    jac = jacobian_fd(params, x, step)
    log_lhs = jac.log_abs_det if jac.sign > 0 else -math.inf
    log_rhs = math.log(single_det_coefficient(params, L)) + 3.0 * float(x[2])
    ok = log_lhs >= log_rhs + math.log1p(-SLACK)
    return CheckResult("single_det", params.as_dict(), log_lhs, log_rhs, ok, x.tolist(), extra={"scale": "log"})


def iterated_det_log_coefficient(params: MapParams, L: float | None = None) -> float:
    face = params.face
    L = face.L_hat if L is None else L
    coeff = params.lam / L**5
    if face.kind != "sphere":
        coeff *= face.min_norm * math.sin(face.theta_S)
    return math.log(coeff)


def _safe_log(v: float) -> float:
    return math.log(v) if v > 0 else -math.inf


def _log_horizontal_norm(params: MapParams, y: np.ndarray) -> float:
    """``log |p(Z(y))|`` without forming ``exp(y3)``."""
    from .geometry import fold_plane

    u = fold_plane(y[:2], params.lam).u
    h = params.face.eval(u, params.lam)
    return math.log(params.nu) + float(y[2]) + _safe_log(float(np.hypot(h[0], h[1])))


def verify_iterated_det(
    params: MapParams, x, n: int, L: float | None = None, max_coord: float = 1e10
) -> CheckResult:
    """Check ``det DZ^n(x) >= (lam/L^5)^n * |p(Z^n(x))|^3 / lam^3``.

    The left side is the chain-rule product of finite-difference determinants
    along the orbit; both sides are compared in logarithms.

    Raises
    ------
    SeamError
        Carrying the step ``k`` at which the orbit comes within the stencil
        width of a seam (or grows too large for a meaningful fold).
    """
    if n < 0:
        raise DomainError("n must be nonnegative")
    cur = np.asarray(x, dtype=float)
    log_lhs = 0.0
    for k in range(n):
        if cur[2] > params.guard or float(np.linalg.norm(cur[:2])) > max_coord:
            raise SeamError(f"orbit too large at step {k}", step=k)
        try:
            jac = jacobian_fd(params, cur)
        except SeamError as exc:
            raise SeamError(f"seam contact at step {k}", step=k) from exc
        log_lhs += jac.log_abs_det if jac.sign > 0 else -math.inf
        if k < n - 1:
            cur = _eval_unchecked(params, cur)
    log_pn = _log_horizontal_norm(params, cur) if n > 0 else _safe_log(float(np.linalg.norm(cur[:2])))
    log_rhs = n * iterated_det_log_coefficient(params, L) - 3.0 * math.log(params.lam) + 3.0 * log_pn
    ok = log_lhs >= log_rhs + math.log1p(-SLACK)
    return CheckResult(
        "iterated_det", params.as_dict(), log_lhs, log_rhs, ok, np.asarray(x).tolist(), extra={"n": n, "scale": "log"}
    )


def local_lipschitz(params: MapParams, x, radius: float = 0.05, n_samples: int = 20000, seed: int = 0) -> float:
    """Bi-Lipschitz constant of the face sampled densely near the fold of ``x``."""
    from .geometry import fold_plane

    u = fold_plane(np.asarray(x, dtype=float)[:2], params.lam).u / params.lam
    rng = np.random.default_rng(seed)
    a = np.clip(u + radius * (2 * rng.random((n_samples, 2)) - 1), -1, 1)
    phi = 2 * np.pi * rng.random(n_samples)
    delta = 10.0 ** rng.uniform(-7, -2, n_samples)
    b = np.clip(a + delta[:, None] * np.column_stack([np.cos(phi), np.sin(phi)]), -1, 1)
    d = np.linalg.norm(a - b, axis=-1)
    keep = d > 1e-12
    r = np.linalg.norm(params.face.unit(a[keep]) - params.face.unit(b[keep]), axis=-1) / d[keep]
    return float(max(r.max(), 1.0 / r.min()))


@dataclass
class SampledCheck:
    """Summary of an inequality checked at many sampled points."""

    check: str
    n_points: int
    n_ok: int
    n_rejected: int
    worst_margin: float
    worst_point: Any
    violations: list
    localized: int

    @property
    def fraction_ok(self) -> float:
        return self.n_ok / max(self.n_points, 1)

    def to_record(self, params: MapParams) -> dict:
        return CheckResult(
            self.check,
            params.as_dict(),
            self.fraction_ok,
            0.999,
            self.fraction_ok >= 0.999 and self.localized == len(self.violations),
            self.worst_point,
            extra={
                "n_points": self.n_points,
                "n_rejected": self.n_rejected,
                "worst_log_margin": self.worst_margin,
                "violations": len(self.violations),
                "localized_to_L_sampling": self.localized,
            },
        ).to_record()


def _log_horizontal_norm_batch(params: MapParams, y: np.ndarray) -> np.ndarray:
    from .geometry import fold_plane

    u = fold_plane(y[:, :2], params.lam).u
    h = params.face.eval(u, params.lam)
    with np.errstate(divide="ignore"):
        return math.log(params.nu) + y[:, 2] + np.log(np.hypot(h[:, 0], h[:, 1]))


def sample_det_checks(
    params: MapParams,
    n_points: int,
    n_iter: int = 1,
    seed: int = 0,
    L: float | None = None,
    box: float | None = None,
    heights: tuple[float, float] = (-4.0, 1.0),
    max_coord: float = 1e10,
) -> SampledCheck:
    """Check a determinant bound at random seam-distant points.

    ``n_iter = 0`` checks the single-step bound ``det DZ(x) >= c * exp(3*x3)``;
    ``n_iter >= 1`` checks the ``n_iter``-step bound along the orbit. Points
    whose orbit meets a seam stencil, passes the overflow guard, or grows past
    ``max_coord`` (where folding loses precision) are rejected and counted.
    Each violation is re-tested with a Lipschitz constant refined near it.
    """
    from .zorich import jacobian_fd_batch

    box = 2.0 * params.lam if box is None else box
    L_used = params.face.L_hat if L is None else L
    rng = np.random.default_rng(seed)
    steps = max(n_iter, 1)
    kept_x, kept_lhs, kept_rhs = [], [], []
    rejected = 0
    total = 0
    while total < n_points:
        m = max(2 * (n_points - total), 64)
        x0 = np.column_stack([rng.uniform(-box, box, m), rng.uniform(-box, box, m), rng.uniform(*heights, m)])
        cur = x0.copy()
        valid = np.ones(m, dtype=bool)
        log_lhs = np.zeros(m)
        for k in range(steps):
            valid &= (cur[:, 2] <= params.guard) & (np.linalg.norm(cur[:, :2], axis=-1) <= max_coord)
            safe = np.where(valid[:, None], cur, 0.0)
            base, seam_ok = jacobian_fd_batch(params, safe)
            valid &= seam_ok
            sign, logdet = np.linalg.slogdet(base)
            log_lhs += np.where(sign > 0, logdet, -np.inf) + 3.0 * safe[:, 2]
            if k < steps - 1:
                with np.errstate(over="ignore", invalid="ignore"):
                    cur = _eval_unchecked(params, safe)
        if n_iter == 0:
            log_rhs = math.log(single_det_coefficient(params, L_used)) + 3.0 * x0[:, 2]
        else:
            log_rhs = (
                n_iter * iterated_det_log_coefficient(params, L_used)
                - 3.0 * math.log(params.lam)
                + 3.0 * _log_horizontal_norm_batch(params, np.where(valid[:, None], cur, 1.0))
            )
        idx = np.flatnonzero(valid)[: n_points - total]
        rejected += int(np.sum(~valid[: (idx[-1] + 1 if len(idx) else m)]))
        kept_x.append(x0[idx])
        kept_lhs.append(log_lhs[idx])
        kept_rhs.append(log_rhs[idx])
        total += len(idx)
    xs = np.concatenate(kept_x)
    margin = np.concatenate(kept_lhs) - np.concatenate(kept_rhs)
    good = margin >= math.log1p(-SLACK)
    violations = xs[~good].tolist()
    localized = 0
    for v in violations:
        L_loc = max(local_lipschitz(params, v), L_used)
        again = verify_single_det(params, v, L_loc) if n_iter == 0 else verify_iterated_det(params, v, n_iter, L_loc)
        localized += bool(again.ok)
    w = int(np.argmin(margin))
    name = "single_det" if n_iter == 0 else f"iterated_det_n{n_iter}"
    return SampledCheck(name, len(xs), int(good.sum()), rejected, float(margin[w]), xs[w].tolist(), violations, localized)


# ---------------------------------------------------------------------------
# ascent near the axis


@dataclass
class AscentResult:
    delta: float
    c: float
    n_checked: int
    failures: int
    worst_gap: float


def _min_h3_on_circle(params: MapParams, r: float, n: int = 2048) -> float:
    t = np.linspace(0.0, 2.0 * np.pi, n, endpoint=False)
    t = np.concatenate([t, np.pi / 4 + np.pi / 2 * np.arange(4)])
    u = np.clip(r * np.column_stack([np.cos(t), np.sin(t)]), -params.lam, params.lam)
    return float(params.face.eval(u, params.lam)[:, 2].min())


def ascent_constant(
    params: MapParams, epsilon: float, n_check: int = 10_000, seed: int = 0, heights: tuple[float, float] = (-20.0, 20.0)
) -> AscentResult:
    """Radius ``delta`` and gain ``c`` with ``p3(Z(x)) > p3(x) + c`` on the cylinder of radius ``delta``.

    ``delta`` is found by bisection so that ``h3 > lam - epsilon`` on the disk
    (the face decreases in height along rays from the apex); ``c`` is
    ``1 + log(nu*(lam - epsilon))``. The inequality is then checked at
    ``n_check`` random points of the cylinder.
    """
    gain = params.nu * (params.lam - epsilon)
    if not (0 < epsilon < params.lam) or gain <= math.exp(-1.0):
        raise RegimeError("need nu*(lam - epsilon) > 1/e for a positive ascent constant")
    c = 1.0 + math.log(gain)
    lo, hi = 0.0, params.lam
    if _min_h3_on_circle(params, hi) > params.lam - epsilon:
        lo = hi
    for _ in range(80):
        mid = 0.5 * (lo + hi)
        if _min_h3_on_circle(params, mid) > params.lam - epsilon:
            lo = mid
        else:
            hi = mid
    delta = lo
    rng = np.random.default_rng(seed)
    rad = delta * np.sqrt(rng.random(n_check))
    ang = 2 * np.pi * rng.random(n_check)
    x3 = rng.uniform(*heights, n_check)
    x = np.column_stack([rad * np.cos(ang), rad * np.sin(ang), x3])
    gap = _eval_unchecked(params, x)[:, 2] - (x3 + c)
    return AscentResult(delta, c, n_check, int(np.sum(gap <= 0)), float(gap.min()))


# ---------------------------------------------------------------------------
# level surfaces in the rectangle beam B_(0,0) = {0 < d < 2 lam, |s| < 2 lam}


def _level_combination(params: MapParams, x12: np.ndarray) -> np.ndarray:
    from .geometry import fold_plane

    u = fold_plane(x12, params.lam).u
    h = params.face.eval(u, params.lam)
    return np.maximum(h[..., 0] - h[..., 1], np.abs(h[..., 0] + h[..., 1]))


def level_surface_height(params: MapParams, n: int, u) -> float | np.ndarray:
    """Height of the surface ``S_n`` above the point ``u`` of the beam ``B_(0,0)``.

    ``S_n`` is the set of ``x`` in the beam whose image lies on the boundary
    of ``{y1 - y2 <= 2(n+1)lam, |y1 + y2| <= 2(n+1)lam}``, so
    ``x3 = log(2(n+1)lam / (nu * max(h1 - h2, |h1 + h2|)))``.

    Raises
    ------
    DomainError
        At the singular points where ``h1 = h2 = 0`` (the combination vanishes).
    """
    u = np.asarray(u, dtype=float)
    comb = _level_combination(params, u)
    if np.any(comb <= 0):
        raise DomainError("singular point of the level surface: h1 +- h2 vanishes")
    out = np.log(2.0 * (n + 1) * params.lam / (params.nu * comb))
    return float(out) if out.ndim == 0 else out


def _beam_grid(lam: float, resolution: int, notch: float):
    N = resolution
    dd = (np.arange(N) + 0.5) * (2.0 * lam / N)
    ss = -2.0 * lam + (np.arange(2 * N) + 0.5) * (4.0 * lam / (2 * N))
    D, S = np.meshgrid(dd, ss, indexing="ij")
    x12 = np.stack([(D + S) / 2.0, (S - D) / 2.0], axis=-1)
    cell = (2.0 * lam / N) * (4.0 * lam / (2 * N)) / 2.0
    keep = np.ones(D.shape, dtype=bool)
    for sx, sy in ((0.0, 0.0), (2.0 * lam, 0.0), (0.0, -2.0 * lam)):
        keep &= np.hypot(x12[..., 0] - sx, x12[..., 1] - sy) > notch
    return x12[keep], cell


def volume_In(params: MapParams, n: int, quad_resolution: int = 256) -> float:
    """Signed volume between ``S_n`` and the plane ``x3 = 0`` over ``B_(0,0)`` (midpoint rule)."""
    x12, cell = _beam_grid(params.lam, quad_resolution, params.lam * 1e-6)
    return float(np.sum(level_surface_height(params, n, x12)) * cell)


def volume_Tn(params: MapParams, n: int, quad_resolution: int = 256) -> tuple[float, float]:
    """Volume between ``S_n`` and ``S_{n+1}``: midpoint quadrature and the closed form ``4 lam^2 log((n+2)/(n+1))``.

    The grid has ``quad_resolution`` cells across the beam and twice as many
    along it; singular vertices are excluded by a notch of radius
    ``lam * 1e-6``.
    """
    if quad_resolution < 16:
        raise DomainError("quad_resolution must be at least 16")
    x12, cell = _beam_grid(params.lam, quad_resolution, params.lam * 1e-6)
    upper = level_surface_height(params, n + 1, x12)
    lower = level_surface_height(params, n, x12)
    numeric = float(np.sum(upper - lower) * cell)
    formula = 4.0 * params.lam**2 * math.log((n + 2) / (n + 1))
    return numeric, formula


# ---------------------------------------------------------------------------
# Lipschitz bound for iterates near the origin


@dataclass
class LipschitzReport:
    worst_ratio: float
    ok: bool
    n_requested: int
    n_used: int
    worst_pair: Any
    n_pairs: int


def verify_lipschitz_iterates(
    params: MapParams, r: float, n: int, n_pairs: int, seed: int = 0, L: float | None = None
) -> LipschitzReport:
    """Worst sampled ratio of ``|Z^n(y1) - Z^n(y2)|`` to the bound on the ball ``B(0, r)``.

    The bound is ``(max(L, lam)/lam)^n * E(r) * E^2(r) * ... * E^n(r) * |y1 - y2|``
    with ``E(t) = nu*lam*exp(t)``. When ``E^k(r)`` passes the overflow guard
    the check is carried out for the largest feasible ``n`` instead, and
    ``n_used`` reports it.
    """
    if r <= 0 or n < 1:
        raise DomainError("need r > 0 and n >= 1")
    L = params.face.L_hat if L is None else L
    orbit, _ = exp_iter(ExpFamily(params.kappa), r, n, params.guard)
    n_used = min(n, len(orbit) - 1)
    while n_used > 0 and orbit[n_used - 1] > params.guard:
        n_used -= 1
    if n_used == 0:
        return LipschitzReport(math.nan, False, n, 0, None, 0)
    log_bound = n_used * math.log(max(L, params.lam) / params.lam) + float(np.sum(np.log(orbit[1 : n_used + 1])))

    rng = np.random.default_rng(seed)
    a = rng.random((n_pairs, 6))
    z = 2 * a[:, 0] - 1
    rho = np.sqrt(1 - z * z)
    dir1 = np.column_stack([rho * np.cos(2 * np.pi * a[:, 1]), rho * np.sin(2 * np.pi * a[:, 1]), z])
    y1 = r * np.cbrt(a[:, 2])[:, None] * dir1
    z2 = 2 * a[:, 3] - 1
    rho2 = np.sqrt(1 - z2 * z2)
    dir2 = np.column_stack([rho2 * np.cos(2 * np.pi * a[:, 4]), rho2 * np.sin(2 * np.pi * a[:, 4]), z2])
    y2 = y1 + (2 * r * 10.0 ** (-8 + 8 * a[:, 5]))[:, None] * dir2
    inside = np.linalg.norm(y2, axis=-1) < r
    y1, y2 = y1[inside], y2[inside]
    axis = np.array([[0.0, 0.0, -0.49], [0.0, 0.0, 0.49], [0.0, 0.0, 0.3], [0.0, 0.0, 0.3 + 1e-6]]) * (r / 0.5)
    y1 = np.concatenate([axis[[0, 2]], y1])
    y2 = np.concatenate([axis[[1, 3]], y2])
    w1, w2 = y1, y2
    for _ in range(n_used):
        w1 = _eval_unchecked(params, w1)
        w2 = _eval_unchecked(params, w2)
    dist = np.linalg.norm(y1 - y2, axis=-1)
    keep = dist > 0
    ratio = np.linalg.norm(w1 - w2, axis=-1)[keep] / (dist[keep] * math.exp(log_bound))
    k = int(np.argmax(ratio))
    worst = float(ratio[k])
    return LipschitzReport(
        worst, worst <= 1 + SLACK, n, n_used, (y1[keep][k].tolist(), y2[keep][k].tolist()), int(keep.sum())
    )


# ---------------------------------------------------------------------------
# the key inequality


def key_log_lhs(params: MapParams, c: float) -> float:
    """``log`` of ``(c+lam)^(log(c+lam)+1) * exp(c+lam) * nu^2 lam^2 * exp(-nu*lam*exp(c)/2)``."""
    t = c + params.lam
    if t <= 0:
        raise DomainError("need c + lam > 0")
    if c > 700:
        return -math.inf
    lt = math.log(t)
    return (lt + 1.0) * lt + t + 2.0 * math.log(params.kappa) - params.kappa * math.exp(c) / 2.0


def key_lhs_naive(params: MapParams, c: float) -> float:
    """Direct evaluation of the key quantity (overflows early; used as a cross-check)."""
    t = c + params.lam
    return t ** (math.log(t) + 1.0) * math.exp(t) * params.kappa**2 * math.exp(-params.kappa * math.exp(c) / 2.0)


def key_inequality_N(params: MapParams, N_max: int = 10**6) -> tuple[int, float]:
    """Smallest ``N >= 1`` such that ``c = E^N(0) - lam`` satisfies the key inequality.

    Returns ``(N, c)``; ``c`` is ``inf`` when ``E^N(0)`` is beyond floating
    range, in which case the left side is zero in the limit.
    """
    if params.kappa <= math.exp(-1.0):
        raise RegimeError("nu*lam must exceed 1/e for E^N(0) to grow")
    log_lam = math.log(params.lam)
    t = 0.0
    for N in range(1, N_max + 1):
        t = params.kappa * math.exp(t) if t < 709 else math.inf
        c = t - params.lam
        if not math.isfinite(c) or key_log_lhs(params, c) <= log_lam:
            return N, c
    raise RegimeError(f"key inequality not met for N <= {N_max}")


# ---------------------------------------------------------------------------
# suite


def run_verification_suite(params: MapParams, samples: int = 2000, pairs: int = 2000, quad_resolution: int = 128,
                           n_max: int = 10, seed: int = 0) -> list[dict]:
    """Run every verifier at ``params`` and return JSON-ready records."""
    from .branches import check_ball_expansion, find_M0
    from .planar import (
        planar_area_Am,
        planar_det_bound,
        planar_det_fd,
        strip_area_between,
        strip_seam_distance,
    )

    records: list[dict] = []
    pd = params.as_dict()

    for n_iter in (0, 1, 2, 3):
        res = sample_det_checks(params, samples, n_iter, seed=seed + n_iter)
        records.append(res.to_record(params))

    worst = math.inf
    worst_n = None
    Ts = []
    for n in range(n_max + 1):
        num, form = volume_Tn(params, n, quad_resolution)
        Ts.append(num)
        err = abs(num - form) / form
        if -err < worst:
            worst, worst_n = -err, n
    rel = -worst
    decreasing = all(a > b for a, b in zip(Ts, Ts[1:]))
    records.append(CheckResult("volume_Tn", pd, rel, 1e-6, rel <= 1e-6 and decreasing, worst_n, "<=",
                               {"T": Ts, "decreasing": decreasing}).to_record())

    lip = verify_lipschitz_iterates(params, 0.5, 3, pairs, seed=seed)
    records.append(CheckResult("lipschitz_iterates", pd, lip.worst_ratio, 1 + SLACK, lip.ok, lip.worst_pair, "<=",
                               {"n_used": lip.n_used}).to_record())

    if params.kappa > math.exp(-1.0):
        N, c = key_inequality_N(params)
        records.append(CheckResult("key_inequality", pd, N, 1, True, None, ">=", {"c": str(c)}).to_record())
        eps = min(0.1, params.lam / 2)
        if params.nu * (params.lam - eps) > math.exp(-1.0):
            asc = ascent_constant(params, eps, n_check=samples, seed=seed)
            records.append(CheckResult("ascent", pd, asc.worst_gap, 0.0, asc.failures == 0, None, ">",
                                       {"delta": asc.delta, "c": asc.c}).to_record())

    M0, alpha = find_M0(params, n_pairs=pairs, seed=seed)
    ball = check_ball_expansion(params, M0, alpha, min(samples, 1000), seed=seed)
    records.append(CheckResult("contraction", pd, alpha, 1.0, alpha < 1.0, None, "<", {"M0_hat": M0}).to_record())
    records.append(CheckResult("ball_expansion", pd, ball.worst_ratio, 1.0, ball.failures == 0, ball.worst_triple, "<",
                               {"n_checked": ball.n_checked}).to_record())

    rng = np.random.default_rng(seed)
    worst_ratio = math.inf
    worst_z = None
    for _ in range(samples):
        z = complex(rng.uniform(-1, 1), rng.uniform(-6, 6))
        if strip_seam_distance(z.imag) <= 1e-4:
            continue
        log_ratio = planar_det_fd(params, z).log_abs_det - math.log(planar_det_bound(params, z.real))
        if log_ratio < worst_ratio:
            worst_ratio, worst_z = log_ratio, [z.real, z.imag]
    records.append(CheckResult("planar_det", pd, worst_ratio, math.log1p(-SLACK), worst_ratio >= math.log1p(-SLACK),
                               worst_z, ">=", {"scale": "log"}).to_record())

    quad = strip_area_between(params, 1)
    form = planar_area_Am(params.lam, 1)
    records.append(CheckResult("strip_area_A1", pd, quad, form, abs(quad - form) <= 0.01 * form, None, "~=").to_record())
    return records


def refine_lipschitz(params: MapParams, n_samples: int = 10**6, seed: int = 1) -> tuple[float, float]:
    """Re-estimate the face's Lipschitz ratios with a larger, independent sample."""
    return estimate_bilipschitz(params.face, n_samples, seed)
