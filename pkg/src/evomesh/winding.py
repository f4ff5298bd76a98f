"""Ray-sum winding numbers, exterior-face tests, seed search, hole closing.

A winding query casts one ray and sums +-1 per transversal crossing (sign of
ray direction against the crossed face's normal). Rays that graze an edge,
vertex, or coplanar face are discarded and redrawn from a deterministic
per-query random sequence, so results are reproducible for a fixed seed.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .aabb import AabbTree
from .errors import WindingDegeneracyError
from .mesh import SurfaceMesh

MAX_REDRAWS = 16


@dataclass
class WindingQuery:
    origin: np.ndarray
    direction: np.ndarray
    hits: list = field(default_factory=list)   # (face id, sign, t)
    redraws: int = 0

    @property
    def value(self) -> int:
        return int(sum(s for _, s, _ in self.hits))


@dataclass
class HoleClosure:
    center_vertices: list = field(default_factory=list)
    fan_faces: list = field(default_factory=list)

    @property
    def is_empty(self):
        return not self.fan_faces

    def synthetic_mask(self, n_faces):
        mask = np.zeros(n_faces, dtype=bool)
        mask[self.fan_faces] = True
        return mask


def _rng_for(seed, *key):
    return np.random.default_rng([int(seed) & 0x7FFFFFFF, *[int(k) & 0x7FFFFFFF for k in key]])


def _random_unit(rng):
    while True:
        v = rng.normal(size=3)
        n = np.linalg.norm(v)
        if n > 1e-6:
            return v / n


def _cone_direction(axis, rng, half_angle_deg=10.0):
    axis = axis / np.linalg.norm(axis)
    # random perpendicular
    helper = _random_unit(rng)
    perp = np.cross(axis, helper)
    n = np.linalg.norm(perp)
    if n < 1e-9:
        return _cone_direction(axis, rng, half_angle_deg)
    perp /= n
    ang = np.deg2rad(half_angle_deg) * rng.uniform(0.05, 1.0)
    return np.cos(ang) * axis + np.sin(ang) * perp


def winding_query(point, tree: AabbTree, seed=0, first_direction=None,
                  cone_axis=None, exclude=None, exclude_mask=None,
                  query_key=0) -> WindingQuery:
    """Cast rays until one is non-degenerate; return its crossing record."""
    point = np.asarray(point, dtype=np.float64)
    rng = _rng_for(seed, query_key)
    for attempt in range(MAX_REDRAWS):
        if attempt == 0 and first_direction is not None:
            d = np.asarray(first_direction, dtype=np.float64)
            d = d / np.linalg.norm(d)
        elif cone_axis is not None:
            d = _cone_direction(np.asarray(cone_axis, dtype=np.float64), rng)
        else:
            d = _random_unit(rng)
        faces, t, signs, degenerate = tree.ray_hits(
            point, d, exclude=exclude, exclude_mask=exclude_mask)
        if degenerate:
            continue
        q = WindingQuery(origin=point, direction=d, redraws=attempt)
        q.hits = [(int(f), int(s), float(tt)) for f, s, tt in zip(faces, signs, t)]
        return q
    raise WindingDegeneracyError(
        f"{MAX_REDRAWS} degenerate rays in a row at point {point.tolist()}")


def winding_number(point, mesh_or_tree, seed=0, exclude_mask=None, query_key=0) -> int:
    """Signed crossing count from `point` to infinity; 0 on the exterior."""
    tree = _as_tree(mesh_or_tree)
    return winding_query(point, tree, seed=seed, exclude_mask=exclude_mask,
                         query_key=query_key).value


def _as_tree(mesh_or_tree) -> AabbTree:
    if isinstance(mesh_or_tree, AabbTree):
        return mesh_or_tree
    return AabbTree(mesh_or_tree.positions, mesh_or_tree.faces)


def is_exterior_face(face, mesh, tree=None, seed=0, exclude_mask=None) -> bool:
    """Ray from the face centroid along its normal, the face itself excluded;
    exterior means the signed crossings sum to zero.

    Only meaningful for faces free of intersection segments.
    """
    tree = _as_tree(mesh if tree is None else tree)
    tri = mesh.positions[mesh.faces[face]]
    centroid = tri.mean(axis=0)
    normal = np.cross(tri[1] - tri[0], tri[2] - tri[0])
    nn = np.linalg.norm(normal)
    if nn == 0.0:
        raise WindingDegeneracyError(f"face {face} is degenerate")
    normal = normal / nn
    q = winding_query(centroid, tree, seed=seed, first_direction=normal,
                      cone_axis=normal, exclude=face, exclude_mask=exclude_mask,
                      query_key=face + 1)
    return q.value == 0


def find_seed(mesh, has_segments, visited, tree=None, seed=0):
    """First unvisited intersection-free face that passes the exterior test.

    Scans in ascending face id so runs are deterministic; returns None when
    no candidate is left (all exterior faces have been claimed).
    """
    tree = _as_tree(mesh if tree is None else tree)
    for f in range(mesh.n_faces):
        if visited[f] or has_segments[f]:
            continue
        if is_exterior_face(f, mesh, tree=tree, seed=seed):
            return f
    return None


def close_holes(mesh: SurfaceMesh):
    """Fan every boundary loop to its centroid; fans are marked synthetic.

    The result is only used for winding queries: synthetic faces never enter
    intersection tests or region growing, and dropping them restores the
    input mesh exactly.
    """
    closure = HoleClosure()
    if not mesh.has_boundary():
        return mesh, closure
    mesh.compact()
    loops = mesh.boundary_loops()
    V = [mesh.positions]
    F = [mesh.faces]
    nv = mesh.n_vertices
    nf = mesh.n_faces
    for loop in loops:
        # boundary halfedge h runs tail->head along the face side; the fan
        # triangle (head, tail, center) keeps the closure consistently oriented
        cycle = [(mesh.origin(h), mesh.dest(h)) for h in loop]
        center = np.mean([mesh.positions[u] for u, _ in cycle], axis=0)
        V.append(center[None, :])
        closure.center_vertices.append(nv)
        fan = []
        for u, w in cycle:
            fan.append((w, u, nv))
        F.append(np.asarray(fan, dtype=np.int64))
        closure.fan_faces.extend(range(nf, nf + len(fan)))
        nf += len(fan)
        nv += 1
    closed = SurfaceMesh(np.vstack(V), np.vstack(F))
    return closed, closure
