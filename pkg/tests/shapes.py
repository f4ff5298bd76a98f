"""Procedural test meshes."""

import numpy as np

from evomesh.mesh import SurfaceMesh


def tetrahedron(scale=1.0, center=(0, 0, 0)):
    v = np.array([(1, 1, 1), (1, -1, -1), (-1, 1, -1), (-1, -1, 1)], dtype=float)
    v = v * scale + np.asarray(center, dtype=float)
    f = [(0, 1, 2), (0, 2, 3), (0, 3, 1), (1, 3, 2)]
    return SurfaceMesh(v, f)


def cube(size=1.0, center=(0.5, 0.5, 0.5), flip=False):
    """Axis-aligned cube as 12 triangles, outward oriented by default."""
    s = size / 2.0
    c = np.asarray(center, dtype=float)
    v = np.array([(x, y, z) for x in (-s, s) for y in (-s, s) for z in (-s, s)]) + c
    quads = [
        (0, 1, 3, 2),  # x = -s, normal -x
        (4, 6, 7, 5),  # x = +s, normal +x
        (0, 4, 5, 1),  # y = -s
        (2, 3, 7, 6),  # y = +s
        (0, 2, 6, 4),  # z = -s
        (1, 5, 7, 3),  # z = +s
    ]
    f = []
    for a, b, cc, d in quads:
        f.append((a, b, cc))
        f.append((a, cc, d))
    f = np.array(f, dtype=np.int64)
    if flip:
        f = f[:, [0, 2, 1]]
    return SurfaceMesh(v, f)


def icosphere(subdivisions=2, radius=1.0, center=(0, 0, 0)):
    t = (1.0 + np.sqrt(5.0)) / 2.0
    v = np.array([
        (-1, t, 0), (1, t, 0), (-1, -t, 0), (1, -t, 0),
        (0, -1, t), (0, 1, t), (0, -1, -t), (0, 1, -t),
        (t, 0, -1), (t, 0, 1), (-t, 0, -1), (-t, 0, 1),
    ], dtype=float)
    f = [
        (0, 11, 5), (0, 5, 1), (0, 1, 7), (0, 7, 10), (0, 10, 11),
        (1, 5, 9), (5, 11, 4), (11, 10, 2), (10, 7, 6), (7, 1, 8),
        (3, 9, 4), (3, 4, 2), (3, 2, 6), (3, 6, 8), (3, 8, 9),
        (4, 9, 5), (2, 4, 11), (6, 2, 10), (8, 6, 7), (9, 8, 1),
    ]
    v /= np.linalg.norm(v, axis=1)[:, None]
    verts = [tuple(p) for p in v]
    index = {p: i for i, p in enumerate(verts)}

    def midpoint(i, j):
        key = tuple(np.asarray(verts[i]) + np.asarray(verts[j]))
        if key in index:
            return index[key]
        p = np.asarray(verts[i]) + np.asarray(verts[j])
        p /= np.linalg.norm(p)
        verts.append(tuple(p))
        index[key] = len(verts) - 1
        return len(verts) - 1

    for _ in range(subdivisions):
        nf = []
        cache = {}
        for a, b, c in f:
            def mid(i, j):
                k = (min(i, j), max(i, j))
                if k not in cache:
                    cache[k] = midpoint(i, j)
                return cache[k]
            ab, bc, ca = mid(a, b), mid(b, c), mid(c, a)
            nf += [(a, ab, ca), (b, bc, ab), (c, ca, bc), (ab, bc, ca)]
        f = nf
    v = np.array(verts) * radius + np.asarray(center, dtype=float)
    return SurfaceMesh(v, f)


def torus(R=2.0, r=0.7, nu=24, nv=12, center=(0, 0, 0)):
    verts = []
    for i in range(nu):
        a = 2 * np.pi * i / nu
        for j in range(nv):
            b = 2 * np.pi * j / nv
            verts.append(((R + r * np.cos(b)) * np.cos(a),
                          (R + r * np.cos(b)) * np.sin(a),
                          r * np.sin(b)))
    f = []
    for i in range(nu):
        for j in range(nv):
            a = i * nv + j
            b = ((i + 1) % nu) * nv + j
            c = ((i + 1) % nu) * nv + (j + 1) % nv
            d = i * nv + (j + 1) % nv
            f.append((a, b, c))
            f.append((a, c, d))
    return SurfaceMesh(np.asarray(verts) + np.asarray(center, dtype=float), f)


def open_cylinder(radius=1.0, height=2.0, nu=24, nz=8):
    """Tube without caps: two boundary loops."""
    verts = []
    for k in range(nz + 1):
        z = -height / 2 + height * k / nz
        for i in range(nu):
            a = 2 * np.pi * i / nu
            verts.append((radius * np.cos(a), radius * np.sin(a), z))
    f = []
    for k in range(nz):
        for i in range(nu):
            a = k * nu + i
            b = k * nu + (i + 1) % nu
            c = (k + 1) * nu + (i + 1) % nu
            d = (k + 1) * nu + i
            f.append((a, b, c))
            f.append((a, c, d))
    return SurfaceMesh(verts, f)


def grid_plane(nx=10, ny=10, size=1.0, z=0.0):
    """Open flat grid in the z-plane, normals +z."""
    xs = np.linspace(0, size, nx + 1)
    ys = np.linspace(0, size, ny + 1)
    verts = [(x, y, z) for y in ys for x in xs]
    f = []
    w = nx + 1
    for j in range(ny):
        for i in range(nx):
            a = j * w + i
            b = j * w + i + 1
            c = (j + 1) * w + i + 1
            d = (j + 1) * w + i
            f.append((a, b, c))
            f.append((a, c, d))
    return SurfaceMesh(verts, f)


def revolution_surface(profile_x, profile_r, nu=32, close_poles=True):
    """Closed surface of revolution about the x axis.

    profile_r may pass through (near) zero magnitude; rings keep their sign,
    which lets tests build self-crossing tubes (a ring with negative radius
    lies on the far side of the axis).
    """
    profile_x = np.asarray(profile_x, dtype=float)
    profile_r = np.asarray(profile_r, dtype=float)
    n = len(profile_x)
    verts = []
    for x, r in zip(profile_x, profile_r):
        for i in range(nu):
            a = 2 * np.pi * i / nu
            verts.append((x, r * np.cos(a), r * np.sin(a)))
    f = []
    for k in range(n - 1):
        for i in range(nu):
            a = k * nu + i
            b = k * nu + (i + 1) % nu
            c = (k + 1) * nu + (i + 1) % nu
            d = (k + 1) * nu + i
            f.append((a, c, b))
            f.append((a, d, c))
    if close_poles:
        left = len(verts)
        verts.append((profile_x[0], 0.0, 0.0))
        right = len(verts)
        verts.append((profile_x[-1], 0.0, 0.0))
        for i in range(nu):
            f.append((left, (i + 1) % nu, i))
            f.append((right, (n - 1) * nu + i, (n - 1) * nu + (i + 1) % nu))
    return SurfaceMesh(verts, f)


def dumbbell(neck=0.45, nu=28, nx=36):
    """Two bulbs joined by a neck of the given radius (still embedded)."""
    xs = np.linspace(-3, 3, nx)
    rs = np.sqrt(np.maximum(1 - (np.abs(xs) - 2) ** 2, neck ** 2 * 0.0 + 0.0))
    rs = np.maximum(rs, 0.02)
    mid = np.abs(xs) < 1.2
    rs[mid] = np.maximum(neck, 0.15 + 0.0 * rs[mid])
    return revolution_surface(xs, rs, nu=nu)


def inverted_neck_tube(nu=24, nx=40, depth=-0.35):
    """Dumbbell whose neck has been pushed through the axis: the wall crosses
    itself around two rings, enclosing an inverted middle section."""
    xs = np.linspace(-3, 3, nx)
    r_end = 1.0
    rs = np.empty_like(xs)
    for i, x in enumerate(xs):
        if abs(x) >= 1.6:
            rs[i] = r_end
        else:
            # smooth dip from +1 down through zero to `depth` at the center
            tt = (np.cos(np.pi * x / 1.6) + 1) / 2  # 0 at |x|=1.6 -> 1 at x=0
            rs[i] = r_end + tt * (depth - r_end)
    # avoid rings at exactly zero radius
    rs[np.abs(rs) < 1e-3] = 1e-3
    return revolution_surface(xs, rs, nu=nu)


def merged(*meshes):
    return SurfaceMesh.concatenate(list(meshes))


def random_rotation(rng):
    q = rng.normal(size=4)
    q /= np.linalg.norm(q)
    w, x, y, z = q
    return np.array([
        [1 - 2 * (y * y + z * z), 2 * (x * y - w * z), 2 * (x * z + w * y)],
        [2 * (x * y + w * z), 1 - 2 * (x * x + z * z), 2 * (y * z - w * x)],
        [2 * (x * z - w * y), 2 * (y * z + w * x), 1 - 2 * (x * x + y * y)],
    ])


def sinusoidal_deform(mesh, amplitude, rng, waves=3):
    """Smooth random bump field along vertex normals; may self-intersect."""
    m = mesh.copy()
    p = m.positions
    n = m.vertex_normals()
    phase = rng.uniform(0, 2 * np.pi, size=3)
    freq = rng.uniform(1.0, float(waves), size=(3, 3))
    s = np.sin(p @ freq[0] + phase[0]) * np.sin(p @ freq[1] + phase[1]) \
        + 0.5 * np.sin(p @ freq[2] + phase[2])
    p += amplitude * s[:, None] * n
    return m
