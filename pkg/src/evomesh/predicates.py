"""Exact orientation predicates with floating-point filters.

All predicates return the exact sign (-1, 0, +1) of a determinant. A fast
floating-point evaluation with a static error bound decides the vast
majority of calls; ambiguous cases fall back to exact integer arithmetic
(doubles are scaled to integers, so the fallback is never wrong).
"""

from __future__ import annotations

import numpy as np

_EPS = 2.0 ** -53
# Static filter constants (classical adaptive-predicate error bounds).
ORIENT2D_BOUND = (3.0 + 16.0 * _EPS) * _EPS
ORIENT3D_BOUND = (7.0 + 56.0 * _EPS) * _EPS


def _sign(x) -> int:
    if x > 0:
        return 1
    if x < 0:
        return -1
    return 0


def scale_to_ints(coords):
    """Map a flat list of floats to integers by a common power-of-two scale.

    Exact: every double is a dyadic rational.
    """
    ratios = [float(x).as_integer_ratio() for x in coords]
    dmax = max(r[1] for r in ratios)
    return [n * (dmax // d) for n, d in ratios]


def orient2d_exact(ax, ay, bx, by, cx, cy) -> int:
    ax, ay, bx, by, cx, cy = scale_to_ints((ax, ay, bx, by, cx, cy))
    return _sign((ax - cx) * (by - cy) - (ay - cy) * (bx - cx))


def orient2d(ax, ay, bx, by, cx, cy) -> int:
    """Sign of the signed area of triangle (a, b, c); +1 for counterclockwise."""
    detleft = (ax - cx) * (by - cy)
    detright = (ay - cy) * (bx - cx)
    det = detleft - detright
    errbound = ORIENT2D_BOUND * (abs(detleft) + abs(detright))
    if det > errbound or -det > errbound:
        return _sign(det)
    if detleft == 0.0 and detright == 0.0:
        return 0
    return orient2d_exact(ax, ay, bx, by, cx, cy)


def orient3d_exact(a, b, c, d) -> int:
    ints = scale_to_ints((*a, *b, *c, *d))
    ax, ay, az, bx, by, bz, cx, cy, cz, dx, dy, dz = ints
    ux, uy, uz = bx - ax, by - ay, bz - az
    vx, vy, vz = cx - ax, cy - ay, cz - az
    wx, wy, wz = dx - ax, dy - ay, dz - az
    det = (ux * (vy * wz - vz * wy)
           + uy * (vz * wx - vx * wz)
           + uz * (vx * wy - vy * wx))
    return _sign(det)


def orient3d(a, b, c, d) -> int:
    """Sign of det[b-a, c-a, d-a].

    +1 when d lies on the side of plane (a, b, c) that the right-handed
    normal of the triangle points to, -1 on the other side, 0 when exactly
    coplanar.
    """
    ux, uy, uz = b[0] - a[0], b[1] - a[1], b[2] - a[2]
    vx, vy, vz = c[0] - a[0], c[1] - a[1], c[2] - a[2]
    wx, wy, wz = d[0] - a[0], d[1] - a[1], d[2] - a[2]

    vywz = vy * wz
    vzwy = vz * wy
    vzwx = vz * wx
    vxwz = vx * wz
    vxwy = vx * wy
    vywx = vy * wx

    det = ux * (vywz - vzwy) + uy * (vzwx - vxwz) + uz * (vxwy - vywx)
    permanent = ((abs(vywz) + abs(vzwy)) * abs(ux)
                 + (abs(vzwx) + abs(vxwz)) * abs(uy)
                 + (abs(vxwy) + abs(vywx)) * abs(uz))
    errbound = ORIENT3D_BOUND * permanent
    if det > errbound or -det > errbound:
        return _sign(det)
    if permanent == 0.0:
        return 0
    return orient3d_exact(a, b, c, d)


def orient3d_batch(a, b, c, d):
    """Vectorized filtered orient3d over stacked points of shape (m, 3).

    Returns (sign, decided): int8 signs valid only where decided is True.
    Undecided entries must be resolved with the scalar exact predicate.
    """
    u = b - a
    v = c - a
    w = d - a
    vywz = v[:, 1] * w[:, 2]
    vzwy = v[:, 2] * w[:, 1]
    vzwx = v[:, 2] * w[:, 0]
    vxwz = v[:, 0] * w[:, 2]
    vxwy = v[:, 0] * w[:, 1]
    vywx = v[:, 1] * w[:, 0]
    det = (u[:, 0] * (vywz - vzwy)
           + u[:, 1] * (vzwx - vxwz)
           + u[:, 2] * (vxwy - vywx))
    permanent = ((np.abs(vywz) + np.abs(vzwy)) * np.abs(u[:, 0])
                 + (np.abs(vzwx) + np.abs(vxwz)) * np.abs(u[:, 1])
                 + (np.abs(vxwy) + np.abs(vywx)) * np.abs(u[:, 2]))
    errbound = ORIENT3D_BOUND * permanent
    decided = np.abs(det) > errbound
    return np.sign(det).astype(np.int8), decided
