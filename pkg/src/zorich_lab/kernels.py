"""Compiled scalar kernels: orbit classification and union-find.

The classification kernel reimplements the forward map for the two built-in
faces with the same operation order as the vectorized NumPy path; tests
compare the two.
"""

from __future__ import annotations

import math

import numpy as np
from numba import njit

ESCAPING = 1
BOUNDED = 2
UNDECIDED = 0

FACE_CODES = {"sphere": 0, "pyramid": 1}


@njit(cache=True, nogil=True)
def _fold(t, lam):
    k = math.ceil((t - lam) / (2.0 * lam))
    s = t - 2.0 * lam * k
    if k % 2.0 != 0.0:
        s = -s
    if s > lam:
        s = lam
    elif s < -lam:
        s = -lam
    return s, abs(k) % 2.0


@njit(cache=True, nogil=True)
def zorich_step(x1, x2, x3, lam, nu, face):
    """One application of the map; returns the image coordinates."""
    u1, r1 = _fold(x1, lam)
    u2, r2 = _fold(x2, lam)
    v1 = min(max(u1 / lam, -1.0), 1.0)
    v2 = min(max(u2 / lam, -1.0), 1.0)
    m = max(abs(v1), abs(v2))
    if face == 0:
        q3 = 1.0 - m
        norm = math.sqrt(v1 * v1 + v2 * v2 + q3 * q3)
        h1 = lam * (v1 / norm)
        h2 = lam * (v2 / norm)
        h3 = lam * (q3 / norm)
    else:
        h1 = u1
        h2 = u2
        h3 = lam - max(abs(u1), abs(u2))
    scale = nu * math.exp(x3)
    sign = 1.0 if (r1 + r2) % 2.0 == 0.0 else -1.0
    return scale * h1, scale * h2, scale * (sign * h3)


@njit(cache=True, nogil=True)
def classify_one(x1, x2, x3, lam, nu, face, horizon, radius, guard, box):
    """Classify one starting point.

    Returns
    -------
    verdict : int
        ``ESCAPING``, ``BOUNDED`` or ``UNDECIDED``.
    step : int
        First-escape step for escaping points, else -1.
    height : float
        Height of the last computed point.
    """
    h_prev2 = 0.0
    h_prev1 = 0.0
    h_cur = x3
    count = 1
    exceeded = math.sqrt(x1 * x1 + x2 * x2 + x3 * x3) > radius
    for k in range(1, horizon + 1):
        if x3 > guard:
            # the next height is beyond representable range: treat it as +inf
            if count == 1 or h_prev1 < h_cur:
                return ESCAPING, k, x3
            return UNDECIDED, -1, x3
        y1, y2, y3 = zorich_step(x1, x2, x3, lam, nu, face)
        if not (math.isfinite(y1) and math.isfinite(y2) and math.isfinite(y3)):
            if count == 1 or h_prev1 < h_cur:
                return ESCAPING, k, x3
            return UNDECIDED, -1, x3
        x1, x2, x3 = y1, y2, y3
        h_prev2, h_prev1, h_cur = h_prev1, h_cur, x3
        count += 1
        if math.sqrt(x1 * x1 + x2 * x2 + x3 * x3) > radius:
            exceeded = True
            if count == 2:
                rising = h_prev1 < h_cur
            else:
                rising = h_prev2 < h_prev1 and h_prev1 < h_cur
            if rising:
                return ESCAPING, k, x3
    if not exceeded and math.sqrt(x1 * x1 + x2 * x2 + x3 * x3) <= box:
        return BOUNDED, -1, x3
    return UNDECIDED, -1, x3


@njit(cache=True, nogil=True)
def classify_many(points, lam, nu, face, horizon, radius, guard, box, verdict, step, height):
    for n in range(points.shape[0]):
        v, s, h = classify_one(points[n, 0], points[n, 1], points[n, 2], lam, nu, face, horizon, radius, guard, box)
        verdict[n] = v
        step[n] = s
        height[n] = h


@njit(cache=True, nogil=True)
def render_tile(
    origin, e1, e2, umin, vmax, du, dv, i0, i1, j0, j1, lam, nu, face, horizon, radius, guard, box, verdict, step, height
):
    """Classify the pixels ``[i0, i1) x [j0, j1)``; row 0 is the top of the window."""
    for i in range(i0, i1):
        b = vmax - (i + 0.5) * dv
        for j in range(j0, j1):
            a = umin + (j + 0.5) * du
            p1 = origin[0] + a * e1[0] + b * e2[0]
            p2 = origin[1] + a * e1[1] + b * e2[1]
            p3 = origin[2] + a * e1[2] + b * e2[2]
            v, s, h = classify_one(p1, p2, p3, lam, nu, face, horizon, radius, guard, box)
            verdict[i, j] = v
            step[i, j] = s
            height[i, j] = h


# ---------------------------------------------------------------------------
# union-find on a boolean voxel grid


@njit(cache=True)
def _find(parent, a):
    root = a
    while parent[root] != root:
        root = parent[root]
    while parent[a] != root:
        nxt = parent[a]
        parent[a] = root
        a = nxt
    return root


@njit(cache=True)
def _union(parent, size, a, b):
    ra = _find(parent, a)
    rb = _find(parent, b)
    if ra == rb:
        return
    if size[ra] < size[rb]:
        ra, rb = rb, ra
    parent[rb] = ra
    size[ra] += size[rb]


@njit(cache=True)
def label_components_26(mask):
    """Connected components of ``mask`` under 26-neighbor adjacency.

    Returns an int64 label array (-1 off the mask, else a root index).
    """
    nx, ny, nz = mask.shape
    total = nx * ny * nz
    parent = np.arange(total)
    size = np.ones(total, dtype=np.int64)
    for i in range(nx):
        for j in range(ny):
            for k in range(nz):
                if not mask[i, j, k]:
                    continue
                a = (i * ny + j) * nz + k
                # half of the 26 offsets suffice: each pair is visited once
                for di in range(0, 2):
                    for dj in range(-1, 2):
                        for dk in range(-1, 2):
                            if di == 0 and (dj < 0 or (dj == 0 and dk <= 0)):
                                continue
                            ii, jj, kk = i + di, j + dj, k + dk
                            if ii >= nx or jj < 0 or jj >= ny or kk < 0 or kk >= nz:
                                continue
                            if mask[ii, jj, kk]:
                                _union(parent, size, a, (ii * ny + jj) * nz + kk)
    labels = np.full(mask.shape, -1, dtype=np.int64)
    for i in range(nx):
        for j in range(ny):
            for k in range(nz):
                if mask[i, j, k]:
                    labels[i, j, k] = _find(parent, (i * ny + j) * nz + k)
    return labels
