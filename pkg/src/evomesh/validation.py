"""Mesh validation: structural manifold checks and a brute-force
self-intersection oracle.

The self-intersection test enumerates all face pairs (O(n^2) with a chunked
bounding-box screen), classifies candidates with filtered float arithmetic,
and resolves every ambiguous pair exactly. Two triangles count as
self-intersecting when their open interiors meet; contacts confined to
boundaries (shared vertices, shared edges, isolated touching points) do not.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from . import hgeom as hg
from .predicates import orient3d, orient3d_batch

STRUCTURAL_KINDS = (
    "non-manifold-edge",
    "non-manifold-vertex",
    "open-boundary",
    "inconsistent-orientation",
)


@dataclass
class Violation:
    kind: str
    elements: list

    def to_dict(self):
        return {"kind": self.kind, "elements": list(self.elements)}


@dataclass
class ValidationReport:
    is_manifold: bool
    violations: list = field(default_factory=list)
    counts: dict = field(default_factory=dict)

    def by_kind(self, kind):
        return [v for v in self.violations if v.kind == kind]

    def to_json(self, indent=None):
        return json.dumps({
            "is_manifold": self.is_manifold,
            "violations": [v.to_dict() for v in self.violations],
            "counts": self.counts,
        }, indent=indent)


def validate_mesh(mesh, check_self_intersections=False, allow_boundary=False,
                  area_eps=1e-8):
    """Full validation report for a mesh.

    is_manifold reflects the structural checks (edge/vertex manifoldness,
    orientation, boundary); degenerate faces and self-intersections are
    reported alongside but flagged under their own kinds.
    """
    mesh.compact()
    V = mesh.positions
    F = mesh.faces
    violations = []

    from .mesh import pair_halfedges
    twin, defects = pair_halfedges(F, len(V))
    for u, w, hs in defects["multi"]:
        violations.append(Violation("non-manifold-edge", [u, w]))
    for u, w, hs in defects["orientation"]:
        violations.append(Violation("inconsistent-orientation", [u, w]))

    if not allow_boundary and len(F):
        boundary = np.flatnonzero(twin.reshape(-1) == -1)
        # edges already reported as defects stay unpaired; don't double-report
        defective = {h for _, _, hs in defects["multi"] + defects["orientation"] for h in hs}
        open_hs = [int(h) for h in boundary if int(h) not in defective]
        if open_hs:
            violations.append(Violation("open-boundary", open_hs))

    # vertex umbrellas: incident faces must form one edge-connected group
    if len(F):
        v2f = [[] for _ in range(len(V))]
        for fi, tri in enumerate(F):
            for v in tri:
                v2f[v].append(fi)
        edge_faces = {}
        for fi, tri in enumerate(F):
            for k in range(3):
                e = (min(tri[k], tri[(k + 1) % 3]), max(tri[k], tri[(k + 1) % 3]))
                edge_faces.setdefault(e, []).append(fi)
        bad_vertices = []
        for v, inc in enumerate(v2f):
            if len(inc) <= 1:
                continue
            groups = _fan_groups(v, inc, F, edge_faces)
            if len(groups) > 1:
                bad_vertices.append(v)
        if bad_vertices:
            violations.append(Violation("non-manifold-vertex", bad_vertices))

    if len(F):
        areas = mesh.face_areas()
        corners = mesh.face_corners()
        e = np.stack([
            np.linalg.norm(corners[:, 1] - corners[:, 0], axis=1),
            np.linalg.norm(corners[:, 2] - corners[:, 1], axis=1),
            np.linalg.norm(corners[:, 0] - corners[:, 2], axis=1),
        ], axis=1).mean(axis=1)
        degenerate = np.flatnonzero(areas <= area_eps * e * e)
        if len(degenerate):
            violations.append(Violation("degenerate-face", degenerate.tolist()))

    si_pairs = []
    if check_self_intersections and len(F) > 1:
        si_pairs = self_intersections_brute(V, F)
        if si_pairs:
            violations.append(Violation(
                "self-intersection", [list(map(int, p)) for p in si_pairs]))

    structural = [v for v in violations if v.kind in STRUCTURAL_KINDS]
    counts = {
        "vertices": int(mesh.n_vertices),
        "faces": int(mesh.n_faces),
        "edges": int(mesh.n_edges),
    }
    for v in violations:
        counts[v.kind] = len(v.elements)
    return ValidationReport(is_manifold=not structural, violations=violations,
                            counts=counts)


def _fan_groups(v, incident, F, edge_faces):
    """Partition the faces incident to v into edge-connected groups."""
    remaining = set(incident)
    groups = []
    while remaining:
        seed = remaining.pop()
        group = {seed}
        stack = [seed]
        while stack:
            fi = stack.pop()
            tri = F[fi]
            for k in range(3):
                a, b = tri[k], tri[(k + 1) % 3]
                if v != a and v != b:
                    continue
                e = (min(a, b), max(a, b))
                for gj in edge_faces.get(e, ()):
                    if gj in remaining:
                        remaining.discard(gj)
                        group.add(gj)
                        stack.append(gj)
        groups.append(group)
    return groups


# ---------------------------------------------------------------------------
# Brute-force self-intersection oracle


def box_overlap_pairs(V, F, chunk=512):
    """All face pairs (i < j) with overlapping axis-aligned bounding boxes."""
    c = V[F]
    lo = c.min(axis=1)
    hi = c.max(axis=1)
    n = len(F)
    out = []
    for s in range(0, n, chunk):
        e = min(s + chunk, n)
        # j ranges over everything after i
        ok = np.ones((e - s, n), dtype=bool)
        for ax in range(3):
            ok &= lo[s:e, None, ax] <= hi[None, :, ax]
            ok &= hi[s:e, None, ax] >= lo[None, :, ax]
        ii, jj = np.nonzero(ok)
        ii = ii + s
        keep = jj > ii
        out.append(np.stack([ii[keep], jj[keep]], axis=1))
    if not out:
        return np.zeros((0, 2), dtype=np.int64)
    return np.vstack(out)


def _shared_vertex_count(F, pairs):
    a = F[pairs[:, 0]]
    b = F[pairs[:, 1]]
    count = np.zeros(len(pairs), dtype=np.int8)
    for k in range(3):
        hit = (a[:, k, None] == b).any(axis=1)
        count += hit.astype(np.int8)
    return count


def self_intersections_brute(V, F, pairs=None):
    """Face pairs whose open triangles intersect; exact on ambiguity."""
    if pairs is None:
        pairs = box_overlap_pairs(V, F)
    if not len(pairs):
        return []
    shared = _shared_vertex_count(F, pairs)
    t1 = V[F[pairs[:, 0]]]
    t2 = V[F[pairs[:, 1]]]

    # screen: all three vertices of one triangle decisively on one side of
    # the other's plane -> no open intersection
    reject = np.zeros(len(pairs), dtype=bool)
    for a, b in ((t1, t2), (t2, t1)):
        signs = np.zeros((len(pairs), 3), dtype=np.int8)
        decided = np.ones(len(pairs), dtype=bool)
        for k in range(3):
            s, d = orient3d_batch(a[:, 0], a[:, 1], a[:, 2], b[:, k])
            signs[:, k] = s
            decided &= d
        one_side = decided & (np.abs(signs.sum(axis=1)) == 3)
        reject |= one_side
    # edge-adjacent pairs are clean whenever decisively non-coplanar; the
    # screen above already covers that (both non-shared vertices strictly
    # off-plane puts the triangle on one side only when signs agree), so
    # only genuinely ambiguous pairs remain.
    survivors = np.flatnonzero(~reject)
    hits = []
    for idx in survivors:
        i, j = int(pairs[idx, 0]), int(pairs[idx, 1])
        if open_triangles_intersect(t1[idx], t2[idx]):
            hits.append((i, j))
    return hits


def _tri_hpoints(t):
    return [hg.hp3_from_floats(*p) for p in t]


def _interval_on_line(tri_h, evals, axis):
    """Exact parameter interval of one triangle's interior along the plane
    intersection line; None when the triangle contributes no interior points.
    """
    zero = [i for i in range(3) if evals[i] == 0]
    pos = [i for i in range(3) if evals[i] > 0]
    neg = [i for i in range(3) if evals[i] < 0]
    if len(zero) >= 2:
        return None  # contact along an edge or the whole plane: boundary only
    if len(zero) == 1:
        if not pos or not neg:
            return None  # touches at one vertex
        v = tri_h[zero[0]]
        a, b = tri_h[pos[0]], tri_h[neg[0]]
        x = hg.edge_plane_point(a, b, evals[pos[0]], evals[neg[0]])
        pts = [v, x]
    else:
        if not pos or not neg:
            return None
        lone, others = (pos[0], neg) if len(pos) == 1 else (neg[0], pos)
        xs = []
        for o in others:
            xs.append(hg.edge_plane_point(tri_h[lone], tri_h[o],
                                          evals[lone], evals[o]))
        pts = xs
    p0 = hg.param_along_axis(pts[0], axis)
    p1 = hg.param_along_axis(pts[1], axis)
    if hg.frac_cmp(p0, p1) > 0:
        p0, p1 = p1, p0
    return p0, p1


def open_triangles_intersect(t1, t2) -> bool:
    """Exact test: do the open triangles share a point?"""
    h1 = _tri_hpoints(t1)
    h2 = _tri_hpoints(t2)
    try:
        pl1 = hg.plane_through(*h1)
        pl2 = hg.plane_through(*h2)
    except ValueError:
        return False  # degenerate triangle: no interior
    e2 = [hg.plane_eval(pl1, p) for p in h2]
    e1 = [hg.plane_eval(pl2, p) for p in h1]
    if all(v > 0 for v in e2) or all(v < 0 for v in e2):
        return False
    if all(v > 0 for v in e1) or all(v < 0 for v in e1):
        return False
    if all(v == 0 for v in e2):
        return _coplanar_open_overlap(h1, h2, pl1)
    i1 = _interval_on_line(h1, e1, _line_axis(pl1, pl2))
    i2 = _interval_on_line(h2, e2, _line_axis(pl1, pl2))
    if i1 is None or i2 is None:
        return False
    lo = i1[0] if hg.frac_cmp(i1[0], i2[0]) >= 0 else i2[0]
    hi = i1[1] if hg.frac_cmp(i1[1], i2[1]) <= 0 else i2[1]
    return hg.frac_cmp(lo, hi) < 0


def _line_axis(pl1, pl2):
    n1 = pl1[:3]
    n2 = pl2[:3]
    d = (n1[1] * n2[2] - n1[2] * n2[1],
         n1[2] * n2[0] - n1[0] * n2[2],
         n1[0] * n2[1] - n1[1] * n2[0])
    return hg.dominant_axis(d)


def _coplanar_open_overlap(h1, h2, plane) -> bool:
    axis = hg.dominant_axis(plane[:3])
    flip = plane[axis] < 0
    a = [hg.project_axis(p, axis, flip) for p in h1]
    b = [hg.project_axis(p, axis, flip) for p in h2]
    if hg.orient2d_h(*b) < 0:
        b = [b[0], b[2], b[1]]
    poly = _clip_convex(b, a)
    if len(poly) < 3:
        return False
    return _poly_area_sign(poly) > 0


def _clip_convex(subject, clip_tri):
    """Sutherland-Hodgman clip of a convex polygon by a CCW triangle (exact).

    All points must be normalized (W > 0), so line evaluations carry the
    Cartesian sign directly.
    """
    poly = [hg.hp2_normalize(p) for p in subject]
    for k in range(3):
        a = clip_tri[k]
        b = clip_tri[(k + 1) % 3]
        line = hg.line2_through(a, b)
        if not poly:
            return []
        vals = [line[0] * p[0] + line[1] * p[1] + line[2] * p[2] for p in poly]
        out = []
        n = len(poly)
        for i in range(n):
            j = (i + 1) % n
            if vals[i] >= 0:
                out.append(poly[i])
            if (vals[i] > 0 > vals[j]) or (vals[i] < 0 < vals[j]):
                cut = hg.line2_intersection(line, hg.line2_through(poly[i], poly[j]))
                out.append(hg.hp2_normalize(cut))
        poly = out
    return poly


def _poly_area_sign(poly) -> int:
    # twice the signed area via the shoelace formula on homogeneous points
    total_num = 0
    total_den = 1
    n = len(poly)
    for i in range(n):
        x1, y1, w1 = poly[i]
        x2, y2, w2 = poly[(i + 1) % n]
        num = x1 * y2 - x2 * y1
        den = w1 * w2
        total_num = total_num * den + num * total_den
        total_den *= den
    if total_den < 0:
        total_num = -total_num
    return 1 if total_num > 0 else (-1 if total_num < 0 else 0)
