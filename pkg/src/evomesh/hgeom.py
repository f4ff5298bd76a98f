"""Exact constructions on homogeneous integer coordinates.

Points are tuples of Python ints: (X, Y, Z, W) in 3-D or (X, Y, W) in 2-D,
with W > 0 after normalization; the Cartesian point is (X/W, Y/W, Z/W).
Doubles convert exactly (dyadic rationals), and every construction below is
a polynomial in the inputs, so derived points such as plane crossings carry
exact coordinates. Normalized tuples are canonical: equal points hash equal,
which is what intersection-curve welding relies on.
"""

from __future__ import annotations

from math import gcd


def _sign(x: int) -> int:
    if x > 0:
        return 1
    if x < 0:
        return -1
    return 0


# ---------------------------------------------------------------------------
# 3-D points


def hp3_from_floats(x, y, z):
    nx, dx = float(x).as_integer_ratio()
    ny, dy = float(y).as_integer_ratio()
    nz, dz = float(z).as_integer_ratio()
    w = max(dx, dy, dz)  # denominators are powers of two
    return (nx * (w // dx), ny * (w // dy), nz * (w // dz), w)


def hp3_normalize(p):
    x, y, z, w = p
    g = gcd(gcd(abs(x), abs(y)), gcd(abs(z), abs(w)))
    if g > 1:
        x //= g
        y //= g
        z //= g
        w //= g
    if w < 0:
        return (-x, -y, -z, -w)
    return (x, y, z, w)


def hp3_to_floats(p):
    x, y, z, w = p
    return (x / w, y / w, z / w)


def orient3d_h(a, b, c, d) -> int:
    """Exact orient3d on homogeneous points: sign of det[b-a, c-a, d-a]."""
    # Row i scaled by W_a * W_i (> 0), so the determinant sign is unchanged.
    ux, uy, uz = (b[0] * a[3] - a[0] * b[3],
                  b[1] * a[3] - a[1] * b[3],
                  b[2] * a[3] - a[2] * b[3])
    vx, vy, vz = (c[0] * a[3] - a[0] * c[3],
                  c[1] * a[3] - a[1] * c[3],
                  c[2] * a[3] - a[2] * c[3])
    wx, wy, wz = (d[0] * a[3] - a[0] * d[3],
                  d[1] * a[3] - a[1] * d[3],
                  d[2] * a[3] - a[2] * d[3])
    det = (ux * (vy * wz - vz * wy)
           + uy * (vz * wx - vx * wz)
           + uz * (vx * wy - vy * wx))
    return _sign(det)


def plane_through(a, b, c):
    """Integer plane (nx, ny, nz, d) through three homogeneous points.

    plane_eval(plane, p) has the same sign as orient3d_h(a, b, c, p).
    """
    # n = (b - a) x (c - a), computed on W-cleared differences.
    ux, uy, uz = (b[0] * a[3] - a[0] * b[3],
                  b[1] * a[3] - a[1] * b[3],
                  b[2] * a[3] - a[2] * b[3])
    vx, vy, vz = (c[0] * a[3] - a[0] * c[3],
                  c[1] * a[3] - a[1] * c[3],
                  c[2] * a[3] - a[2] * c[3])
    nx = uy * vz - uz * vy
    ny = uz * vx - ux * vz
    nz = ux * vy - uy * vx
    # Offset so that plane_eval(a) == 0: d = -(n . a_xyz) / a_w; fold the
    # 1/a_w scale into the normal part so everything stays integral.
    d = -(nx * a[0] + ny * a[1] + nz * a[2])
    aw = a[3]
    nx, ny, nz = nx * aw, ny * aw, nz * aw
    g = gcd(gcd(abs(nx), abs(ny)), gcd(abs(nz), abs(d)))
    if g == 0:
        raise ValueError("degenerate triangle has no supporting plane")
    if g > 1:
        nx //= g
        ny //= g
        nz //= g
        d //= g
    return (nx, ny, nz, d)


def plane_eval(plane, p) -> int:
    """Signed incidence value of homogeneous point p against an integer plane."""
    nx, ny, nz, d = plane
    return nx * p[0] + ny * p[1] + nz * p[2] + d * p[3]


def plane_normal(plane):
    return plane[:3]


def edge_plane_point(a, b, ea: int, eb: int):
    """Exact crossing of segment a-b with a plane.

    ea and eb are the plane_eval values of a and b; they must have strictly
    opposite signs. Result is the homogeneous intersection point.
    """
    # Cartesian: x = (ea' * b - eb' * a) / (ea' - eb') with ea' = ea / Wa,
    # eb' = eb / Wb; clearing denominators gives an all-integer form.
    x = ea * b[0] - eb * a[0]
    y = ea * b[1] - eb * a[1]
    z = ea * b[2] - eb * a[2]
    w = ea * b[3] - eb * a[3]
    return hp3_normalize((x, y, z, w))


def dominant_axis(n) -> int:
    ax, ay, az = abs(n[0]), abs(n[1]), abs(n[2])
    if ax >= ay and ax >= az:
        return 0
    if ay >= az:
        return 1
    return 2


# ---------------------------------------------------------------------------
# 2-D points (projections into a face plane)


def hp2_normalize(p):
    x, y, w = p
    g = gcd(gcd(abs(x), abs(y)), abs(w))
    if g > 1:
        x //= g
        y //= g
        w //= g
    if w < 0:
        return (-x, -y, -w)
    return (x, y, w)


def project_axis(p3, axis: int, flip: bool):
    """Drop one coordinate of a 3-D homogeneous point.

    With flip=True the two kept coordinates are swapped, which mirrors the
    projection; callers use it to keep the face's own corners counterclockwise.
    """
    keep = [(1, 2), (2, 0), (0, 1)][axis]
    u, v = p3[keep[0]], p3[keep[1]]
    if flip:
        u, v = v, u
    return (u, v, p3[3])


def orient2d_h(a, b, c) -> int:
    det = ((b[0] * a[2] - a[0] * b[2]) * (c[1] * a[2] - a[1] * c[2])
           - (b[1] * a[2] - a[1] * b[2]) * (c[0] * a[2] - a[0] * c[2]))
    return _sign(det)


def incircle_h(a, b, c, d) -> int:
    """Exact incircle test; assumes (a, b, c) counterclockwise.

    Positive when d is strictly inside the circumcircle of (a, b, c).
    """
    rows = []
    for p in (a, b, c, d):
        x, y, w = p
        rows.append((x * w, y * w, x * x + y * y, w * w))
    (a0, a1, a2, a3), (b0, b1, b2, b3), (c0, c1, c2, c3), (d0, d1, d2, d3) = rows
    # 4x4 determinant by cofactor expansion along the last row.
    m01 = a0 * b1 - a1 * b0
    m02 = a0 * c1 - a1 * c0
    m03 = a0 * d1 - a1 * d0
    m12 = b0 * c1 - b1 * c0
    m13 = b0 * d1 - b1 * d0
    m23 = c0 * d1 - c1 * d0
    det = ((a2 * b3 - a3 * b2) * m23
           - (a2 * c3 - a3 * c2) * m13
           + (a2 * d3 - a3 * d2) * m12
           + (b2 * c3 - b3 * c2) * m03
           - (b2 * d3 - b3 * d2) * m02
           + (c2 * d3 - c3 * d2) * m01)
    # Row i was scaled by Wi^2 > 0; the sign convention of the classical
    # incircle determinant (positive inside for CCW abc) is preserved.
    return _sign(det)


def line2_through(a, b):
    """Homogeneous 2-D line through two points (cross product)."""
    return (a[1] * b[2] - a[2] * b[1],
            a[2] * b[0] - a[0] * b[2],
            a[0] * b[1] - a[1] * b[0])


def line2_intersection(l, m):
    """Homogeneous intersection point of two 2-D lines (may have W = 0)."""
    return (l[1] * m[2] - l[2] * m[1],
            l[2] * m[0] - l[0] * m[2],
            l[0] * m[1] - l[1] * m[0])


def lift_to_plane(p2, plane, axis: int, flip: bool):
    """Inverse of project_axis for points known to lie on the given plane."""
    u, v, w = p2
    if flip:
        u, v = v, u
    nx, ny, nz, d = plane
    keep = [(1, 2), (2, 0), (0, 1)][axis]
    n = [nx, ny, nz]
    na = n[axis]
    # Solve n . (x/W) + d = 0 for the dropped coordinate.
    dropped = -(d * w + n[keep[0]] * u + n[keep[1]] * v)
    coords = [None, None, None]
    coords[keep[0]] = u * na
    coords[keep[1]] = v * na
    coords[axis] = dropped
    return hp3_normalize((coords[0], coords[1], coords[2], w * na))


# ---------------------------------------------------------------------------
# Exact rational parameters (for ordering points along a line)


def frac_cmp(a, b) -> int:
    """Compare two rationals given as (num, den) pairs with den != 0."""
    an, ad = a
    bn, bd = b
    if ad < 0:
        an, ad = -an, -ad
    if bd < 0:
        bn, bd = -bn, -bd
    return _sign(an * bd - bn * ad)


def param_along_axis(p, axis: int):
    """Coordinate of a homogeneous 3-D point along an axis, as (num, den)."""
    return (p[axis], p[3])
