"""Exact triangle-triangle intersection classification and mesh perturbation.

The classifier distinguishes three outcomes:

- ``disjoint``: no contact, or contact confined to a simplex the two faces
  legitimately share in the mesh (a common vertex or edge is adjacency, not
  self-intersection).
- ``proper_segment``: a transversal crossing whose intersection is a segment
  with distinct exact endpoints. Segments may end at a shared mesh vertex
  (fold-through-vertex), which perturbation cannot and need not remove.
- ``boundary_case``: every degenerate contact (touching points, coplanar
  overlaps, edges lying in planes, edge-through-edge coincidences). These are
  escaped by perturbing the mesh and retrying rather than enumerated.

All decisions are exact: points are converted to homogeneous integer
coordinates and every test is a sign of an integer polynomial.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from . import hgeom as hg
from .errors import GeometryError

DISJOINT = "disjoint"
PROPER_SEGMENT = "proper_segment"
BOUNDARY_CASE = "boundary_case"

POINT_CONTACT = "point_contact"
COPLANAR_OVERLAP = "coplanar_overlap"
EDGE_COLLINEAR = "edge_collinear"
VERTEX_ON_FACE = "vertex_on_face"


@dataclass
class TriTriResult:
    kind: str
    segment: Optional[tuple] = None        # pair of homogeneous 3-D points
    boundary_detail: Optional[str] = None

    @property
    def is_proper(self):
        return self.kind == PROPER_SEGMENT


@dataclass
class PerturbationPolicy:
    """Offset-style perturbation: vertices move along their normals by
    delta * local mean edge length * jitter, jitter in [0.5, 1.5] hashed
    from (vertex id, attempt) so retries are reproducible."""
    delta: float = 1e-4
    max_retries: int = 5

    def __post_init__(self):
        if self.delta < 0:
            raise ValueError("delta must be >= 0")
        if self.max_retries < 1:
            raise ValueError("max_retries must be >= 1")


def _splitmix64(x):
    x = (x + 0x9E3779B97F4A7C15) & 0xFFFFFFFFFFFFFFFF
    z = x
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & 0xFFFFFFFFFFFFFFFF
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & 0xFFFFFFFFFFFFFFFF
    return z ^ (z >> 31)


def jitter(vertex_id: int, attempt: int) -> float:
    """Deterministic jitter in [0.5, 1.5] keyed on (vertex id, attempt)."""
    h = _splitmix64((vertex_id << 20) ^ attempt)
    return 0.5 + (h / 2.0 ** 64)


def perturb(mesh, policy: PerturbationPolicy, attempt: int):
    """Offset every vertex along its normal; returns a new mesh.

    Displacement is delta * mean incident edge length * jitter(v, attempt);
    connectivity is untouched. delta == 0 is the identity.
    """
    if attempt > policy.max_retries:
        raise ValueError("attempt exceeds the retry budget")
    out = mesh.copy()
    if policy.delta == 0.0:
        return out
    normals = out.vertex_normals()
    eavg = out.vertex_mean_edge_length()
    j = np.array([jitter(v, attempt) for v in range(out.n_vertices)])
    out.positions[:] = out.positions + (policy.delta * eavg * j)[:, None] * normals
    return out


# ---------------------------------------------------------------------------
# Plane projection


class PlaneProjector:
    """Orientation-preserving 2-D projection for one face's supporting plane.

    Projection drops the plane normal's dominant axis (exact); the face's own
    corners always map to a counterclockwise triangle. Lifting restores exact
    3-D coordinates for points on the plane.
    """

    def __init__(self, corners_h):
        self.plane = hg.plane_through(*corners_h)
        self.axis = hg.dominant_axis(self.plane[:3])
        self.flip = self.plane[self.axis] < 0

    def project(self, p3):
        return hg.project_axis(p3, self.axis, self.flip)

    def lift(self, p2):
        return hg.lift_to_plane(p2, self.plane, self.axis, self.flip)


def project_to_plane(corners_h, points_h):
    """Project points lying on a face's plane; returns (2-D points, projector).

    The projector acts as the back-map: projector.lift restores the exact
    3-D coordinates of any projected point.
    """
    proj = PlaneProjector(corners_h)
    for p in points_h:
        if hg.plane_eval(proj.plane, p) != 0:
            raise GeometryError("point does not lie on the supporting plane")
    return [proj.project(p) for p in points_h], proj


# ---------------------------------------------------------------------------
# Exact triangle-triangle classification


def tri_hpoints(tri):
    return tuple(hg.hp3_from_floats(*p) for p in np.asarray(tri, dtype=np.float64))


def tri_tri_intersect(t1, t2, shared=(), h1=None, h2=None) -> TriTriResult:
    """Classify the intersection of two triangles.

    `shared` lists mesh-shared corners as (slot in t1, slot in t2) pairs.
    Optional h1/h2 pass precomputed homogeneous corners.
    """
    h1 = tri_hpoints(t1) if h1 is None else h1
    h2 = tri_hpoints(t2) if h2 is None else h2
    try:
        pl1 = hg.plane_through(*h1)
        pl2 = hg.plane_through(*h2)
    except ValueError:
        raise GeometryError("degenerate input triangle") from None

    ev2 = [hg.plane_eval(pl1, q) for q in h2]   # t2 against t1's plane
    ev1 = [hg.plane_eval(pl2, p) for p in h1]
    if all(v > 0 for v in ev2) or all(v < 0 for v in ev2):
        return TriTriResult(DISJOINT)
    if all(v > 0 for v in ev1) or all(v < 0 for v in ev1):
        return TriTriResult(DISJOINT)

    shared1 = {i for i, _ in shared}
    shared2 = {j for _, j in shared}

    if all(v == 0 for v in ev2):
        return _classify_coplanar(h1, h2, pl1, shared)

    # Non-coplanar. Zero evaluations at non-shared corners are degeneracies
    # whenever there is any actual contact.
    axis = _line_axis(pl1, pl2)
    i1 = _closed_interval(h1, ev1, axis)
    i2 = _closed_interval(h2, ev2, axis)
    if i1 is None or i2 is None:
        return TriTriResult(DISJOINT)
    lo = i1[0] if hg.frac_cmp(i1[0][0], i2[0][0]) >= 0 else i2[0]
    hi = i1[1] if hg.frac_cmp(i1[1][0], i2[1][0]) <= 0 else i2[1]
    c = hg.frac_cmp(lo[0], hi[0])
    if c > 0:
        return TriTriResult(DISJOINT)

    nonshared_zero1 = [i for i in range(3) if ev1[i] == 0 and i not in shared1]
    nonshared_zero2 = [j for j in range(3) if ev2[j] == 0 and j not in shared2]

    if c == 0:
        # single-point contact; fine only when it is a shared mesh vertex
        if _is_shared_vertex_point(lo[1], h1, h2, shared):
            return TriTriResult(DISJOINT)
        detail = VERTEX_ON_FACE if (nonshared_zero1 or nonshared_zero2) else POINT_CONTACT
        return TriTriResult(BOUNDARY_CASE, boundary_detail=detail)

    # positive-length contact
    if len(shared) == 2:
        # edge-adjacent and non-coplanar: contact can only be the shared edge
        return TriTriResult(DISJOINT)
    if nonshared_zero1 or nonshared_zero2:
        n_zeros = max(len(nonshared_zero1), len(nonshared_zero2))
        detail = EDGE_COLLINEAR if n_zeros >= 2 else VERTEX_ON_FACE
        return TriTriResult(BOUNDARY_CASE, boundary_detail=detail)
    # an interval endpoint produced by both triangles at once means an edge
    # of one crosses an edge of the other exactly: degenerate
    if _coincident_distinct(i1[0], i2[0], h1, h2, shared) \
            or _coincident_distinct(i1[1], i2[1], h1, h2, shared):
        return TriTriResult(BOUNDARY_CASE, boundary_detail=POINT_CONTACT)
    return TriTriResult(PROPER_SEGMENT, segment=(lo[1], hi[1]))


def _is_shared_vertex_point(p, h1, h2, shared):
    for i, j in shared:
        if hg.hp3_normalize(h1[i]) == p:
            return True
    return False


def _coincident_distinct(a, b, h1, h2, shared):
    """Same geometric endpoint from both triangles, not a shared vertex."""
    if a[1] != b[1]:
        return False
    return not _is_shared_vertex_point(a[1], h1, h2, shared)


def _line_axis(pl1, pl2):
    n1, n2 = pl1[:3], pl2[:3]
    d = (n1[1] * n2[2] - n1[2] * n2[1],
         n1[2] * n2[0] - n1[0] * n2[2],
         n1[0] * n2[1] - n1[1] * n2[0])
    if d == (0, 0, 0):
        raise GeometryError("parallel distinct planes have no common line")
    return hg.dominant_axis(d)


def _closed_interval(tri_h, evals, axis):
    """Closed intersection interval of one triangle with the other's plane.

    Returns ((param, point), (param, point)) sorted by param, or None when
    the triangle does not meet the plane. Points are normalized homogeneous.
    """
    zero = [i for i in range(3) if evals[i] == 0]
    pos = [i for i in range(3) if evals[i] > 0]
    neg = [i for i in range(3) if evals[i] < 0]
    pts = []
    if len(zero) == 3:
        raise GeometryError("coplanar triangles have no interval")
    if len(zero) == 2:
        pts = [hg.hp3_normalize(tri_h[zero[0]]), hg.hp3_normalize(tri_h[zero[1]])]
    elif len(zero) == 1:
        if not pos or not neg:
            v = hg.hp3_normalize(tri_h[zero[0]])
            pts = [v, v]
        else:
            v = hg.hp3_normalize(tri_h[zero[0]])
            x = hg.edge_plane_point(tri_h[pos[0]], tri_h[neg[0]],
                                    evals[pos[0]], evals[neg[0]])
            pts = [v, x]
    else:
        if not pos or not neg:
            return None
        lone, others = (pos[0], neg) if len(pos) == 1 else (neg[0], pos)
        for o in others:
            pts.append(hg.edge_plane_point(tri_h[lone], tri_h[o],
                                           evals[lone], evals[o]))
    out = [(hg.param_along_axis(p, axis), p) for p in pts]
    if hg.frac_cmp(out[0][0], out[1][0]) > 0:
        out.reverse()
    return out


# ---------------------------------------------------------------------------
# Coplanar contact classification


def _classify_coplanar(h1, h2, plane, shared):
    """Coplanar pair: clip one closed triangle by the other and inspect the
    contact set. Anything beyond the shared simplex is a boundary case."""
    axis = hg.dominant_axis(plane[:3])
    flip = plane[axis] < 0
    a = [hg.project_axis(p, axis, flip) for p in h1]      # CCW by construction
    b_raw = [hg.project_axis(p, axis, flip) for p in h2]
    orient_b = hg.orient2d_h(*b_raw)
    if orient_b == 0:
        raise GeometryError("degenerate coplanar triangle")
    b = b_raw if orient_b > 0 else [b_raw[0], b_raw[2], b_raw[1]]

    from .validation import _clip_convex, _poly_area_sign
    poly = _clip_convex(b, a)
    if not poly:
        return TriTriResult(DISJOINT)
    if len(poly) >= 3 and _poly_area_sign(poly) > 0:
        return TriTriResult(BOUNDARY_CASE, boundary_detail=COPLANAR_OVERLAP)

    contact = []
    for p in poly:
        p = hg.hp2_normalize(p)
        if p not in contact:
            contact.append(p)
    shared_pts = [hg.hp2_normalize(a[i]) for i, _ in shared]
    if _contact_within_shared(contact, shared_pts):
        return TriTriResult(DISJOINT)
    detail = EDGE_COLLINEAR if len(contact) >= 2 else POINT_CONTACT
    return TriTriResult(BOUNDARY_CASE, boundary_detail=detail)


def _contact_within_shared(contact, shared_pts):
    if len(shared_pts) == 0:
        return False
    if len(shared_pts) == 1:
        return all(p == shared_pts[0] for p in contact)
    s, t = shared_pts
    for p in contact:
        if hg.orient2d_h(s, t, p) != 0 or not _on_segment(s, t, p):
            return False
    return True


def _on_segment(s, t, p):
    """p collinear with s-t: does it lie within the closed span?"""
    for axis in range(2):
        ps = (s[axis], s[2])
        pt = (t[axis], t[2])
        pp = (p[axis], p[2])
        lo, hi = (ps, pt) if hg.frac_cmp(ps, pt) <= 0 else (pt, ps)
        if hg.frac_cmp(pp, lo) < 0 or hg.frac_cmp(pp, hi) > 0:
            return False
    return True
