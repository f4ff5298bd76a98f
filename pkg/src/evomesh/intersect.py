"""Self-intersection detection: box broad phase, filtered narrow phase,
and the perturb-and-retry loop that assembles the intersection catalog.

The broad phase is a vectorized sweep-and-prune over face bounding boxes.
Candidate pairs then pass through float screens (with error bounds) that
discard the overwhelming majority; only ambiguous or genuinely crossing
pairs reach the exact classifier. Any boundary case aborts the pass: the
whole mesh is perturbed and the catalog rebuilt from scratch.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field

import numpy as np

from . import hgeom as hg
from .errors import PerturbationRetryError
from .kernel import (BOUNDARY_CASE, PROPER_SEGMENT, PerturbationPolicy,
                     perturb, tri_tri_intersect)
from .predicates import orient3d_batch


@dataclass
class IntersectionSegment:
    partner: int          # partner face id
    a: tuple              # exact homogeneous endpoints, normalized
    b: tuple

    def endpoints_float(self):
        return hg.hp3_to_floats(self.a), hg.hp3_to_floats(self.b)


@dataclass
class IntersectionCatalog:
    segments: dict = field(default_factory=dict)   # face id -> [IntersectionSegment]
    candidate_pairs: int = 0
    proper_segments: int = 0
    boundary_retries: int = 0
    narrow_exact_calls: int = 0
    wall_time: float = 0.0

    def has_segments(self, face) -> bool:
        return face in self.segments

    def segment_mask(self, n_faces):
        mask = np.zeros(n_faces, dtype=bool)
        for f in self.segments:
            mask[f] = True
        return mask

    def face_pairs(self):
        """Unordered face pairs carrying at least one segment."""
        out = set()
        for f, segs in self.segments.items():
            for s in segs:
                out.add((min(f, s.partner), max(f, s.partner)))
        return out

    def counters(self):
        return {
            "candidate_pairs": self.candidate_pairs,
            "proper_segments": self.proper_segments,
            "boundary_retries": self.boundary_retries,
            "narrow_exact_calls": self.narrow_exact_calls,
            "wall_time_s": self.wall_time,
        }


def broad_phase(mesh, chunk=4096):
    """Candidate face pairs (i < j) with overlapping bounding boxes.

    Sweep-and-prune along the axis of largest centroid spread; the other
    two axes are filtered vectorized. Adjacent faces are included: the
    narrow phase filters shared-simplex contact with adjacency awareness.
    """
    corners = mesh.face_corners()
    nf = len(corners)
    if nf < 2:
        return np.zeros((0, 2), dtype=np.int64)
    lo = corners.min(axis=1)
    hi = corners.max(axis=1)
    centers = (lo + hi) * 0.5
    ax = int(np.argmax(centers.var(axis=0)))
    rest = [a for a in range(3) if a != ax]

    order = np.argsort(lo[:, ax], kind="stable")
    slo = lo[order]
    shi = hi[order]
    upper = np.searchsorted(slo[:, ax], shi[:, ax], side="right")
    start = np.arange(nf) + 1
    counts = np.maximum(upper - start, 0)

    pairs_out = []
    pos = 0
    while pos < nf:
        end = pos
        budget = 0
        while end < nf and budget < chunk * 64:
            budget += counts[end]
            end += 1
        block = np.arange(pos, end)
        c = counts[block]
        if c.sum() == 0:
            pos = end
            continue
        ii = np.repeat(block, c)
        offs = np.arange(len(ii)) - np.repeat(np.cumsum(c) - c, c)
        jj = np.repeat(start[block], c) + offs
        ok = np.ones(len(ii), dtype=bool)
        for a in rest:
            ok &= slo[jj, a] <= shi[ii, a]
            ok &= shi[jj, a] >= slo[ii, a]
        ii, jj = ii[ok], jj[ok]
        fi = order[ii]
        fj = order[jj]
        pairs_out.append(np.stack([np.minimum(fi, fj), np.maximum(fi, fj)], axis=1))
        pos = end
    if not pairs_out:
        return np.zeros((0, 2), dtype=np.int64)
    pairs = np.vstack(pairs_out)
    pairs = pairs[np.lexsort((pairs[:, 1], pairs[:, 0]))]
    return pairs


def _shared_slots(f1, f2):
    out = []
    for i in range(3):
        for j in range(3):
            if f1[i] == f2[j]:
                out.append((i, j))
    return tuple(out)


_REL_MARGIN = 1e-7


def _screen(V, F, pairs):
    """Float screens: True where a pair is decisively intersection-free.

    Rejections are conservative (error-bounded plane-side tests, then a
    margin-padded interval test on the plane intersection line); anything
    ambiguous survives to the exact classifier.
    """
    t1 = V[F[pairs[:, 0]]]
    t2 = V[F[pairs[:, 1]]]
    shared = np.zeros(len(pairs), dtype=np.int8)
    a = F[pairs[:, 0]]
    b = F[pairs[:, 1]]
    for k in range(3):
        shared += (a[:, k, None] == b).any(axis=1).astype(np.int8)

    dets = []   # raw determinants and decided masks, both directions
    stats = []
    for src, dst in ((t1, t2), (t2, t1)):
        sgn = np.zeros((len(pairs), 3), dtype=np.int8)
        dec = np.zeros((len(pairs), 3), dtype=bool)
        det = np.zeros((len(pairs), 3))
        for k in range(3):
            u = src[:, 1] - src[:, 0]
            v = src[:, 2] - src[:, 0]
            w = dst[:, k] - src[:, 0]
            d = np.einsum("ij,ij->i", u, np.cross(v, w))
            s, decided = orient3d_batch(src[:, 0], src[:, 1], src[:, 2], dst[:, k])
            sgn[:, k] = s
            dec[:, k] = decided
            det[:, k] = d
        p = ((sgn > 0) & dec).sum(axis=1).astype(np.int8)
        n = ((sgn < 0) & dec).sum(axis=1).astype(np.int8)
        dets.append((det, dec, sgn))
        stats.append((p, n))
    (det2, dec2, sgn2), (det1, dec1, sgn1) = dets
    (p2, n2), (p1, n1) = stats

    reject = np.zeros(len(pairs), dtype=bool)
    non_adj = shared == 0
    reject |= non_adj & ((p2 == 3) | (n2 == 3) | (p1 == 3) | (n1 == 3))
    edge_adj = shared == 2
    reject |= edge_adj & ((p2 + n2 >= 1) | (p1 + n1 >= 1))
    vert_adj = shared == 1
    reject |= vert_adj & (((p2 == 2) & (n2 == 0)) | ((n2 == 2) & (p2 == 0))
                          | ((p1 == 2) & (n1 == 0)) | ((n1 == 2) & (p1 == 0)))

    # interval separation along the plane intersection line, non-adjacent
    # pairs with all six side tests decided and mixed signs
    cand = non_adj & ~reject & dec1.all(axis=1) & dec2.all(axis=1)
    idx = np.flatnonzero(cand)
    if len(idx):
        sep = _intervals_separated(t1[idx], t2[idx], det1[idx], det2[idx],
                                   sgn1[idx], sgn2[idx])
        reject[idx[sep]] = True

    # vertex-adjacent pairs whose crossing wedges open in opposite
    # directions touch only at the shared vertex
    cand = vert_adj & ~reject
    idx = np.flatnonzero(cand)
    if len(idx):
        opp = _vertex_adjacent_opposite(
            a[idx], b[idx], t1[idx], t2[idx], det1[idx], det2[idx],
            dec1[idx], dec2[idx], sgn1[idx], sgn2[idx])
        reject[idx[opp]] = True
    return reject, shared


def _line_dirs(t1, t2):
    n1 = np.cross(t1[:, 1] - t1[:, 0], t1[:, 2] - t1[:, 0])
    n2 = np.cross(t2[:, 1] - t2[:, 0], t2[:, 2] - t2[:, 0])
    return np.cross(n1, n2)


def _interval_1d(tri, det, sgn, d):
    """Projected interval of each triangle on its plane-line, via the lone
    vertex and the two plane crossings. Requires decided nonzero signs."""
    proj = np.einsum("mkj,mj->mk", tri, d)
    total = sgn.sum(axis=1)              # +-1: majority side
    majority = np.sign(total)[:, None]
    lone = np.argmax(sgn != majority, axis=1)
    rows = np.arange(len(tri))
    o1 = (lone + 1) % 3
    o2 = (lone + 2) % 3
    sl = det[rows, lone]
    xs = []
    for o in (o1, o2):
        so = det[rows, o]
        t = sl / (sl - so)
        xs.append(proj[rows, lone] + t * (proj[rows, o] - proj[rows, lone]))
    lo = np.minimum(xs[0], xs[1])
    hi = np.maximum(xs[0], xs[1])
    return lo, hi, np.abs(proj).max(axis=1)


def _intervals_separated(t1, t2, det1, det2, sgn1, sgn2):
    mixed1 = np.abs(sgn1.sum(axis=1)) == 1
    mixed2 = np.abs(sgn2.sum(axis=1)) == 1
    ok = mixed1 & mixed2
    sep = np.zeros(len(t1), dtype=bool)
    if not ok.any():
        return sep
    d = _line_dirs(t1[ok], t2[ok])
    lo1, hi1, s1 = _interval_1d(t1[ok], det1[ok], sgn1[ok], d)
    lo2, hi2, s2 = _interval_1d(t2[ok], det2[ok], sgn2[ok], d)
    margin = _REL_MARGIN * np.maximum(s1, s2)
    sep[np.flatnonzero(ok)] = (lo1 > hi2 + margin) | (lo2 > hi1 + margin)
    return sep


def _vertex_adjacent_opposite(fa, fb, t1, t2, det1, det2, dec1, dec2, sgn1, sgn2):
    """True where two vertex-adjacent straddling triangles provably open
    their crossing wedges in opposite directions along the plane line."""
    m = len(fa)
    out = np.zeros(m, dtype=bool)
    # slot of the shared vertex on each side
    match1 = np.zeros((m, 3), dtype=bool)
    match2 = np.zeros((m, 3), dtype=bool)
    for k in range(3):
        match1[:, k] = (fa[:, k, None] == fb).any(axis=1)
        match2[:, k] = (fb[:, k, None] == fa).any(axis=1)
    i1 = np.argmax(match1, axis=1)
    i2 = np.argmax(match2, axis=1)
    rows = np.arange(m)
    # the two non-shared vertices must be decided and straddle
    ok = np.ones(m, dtype=bool)
    for slot_arr, dec, sgn in ((i1, dec1, sgn1), (i2, dec2, sgn2)):
        o1 = (slot_arr + 1) % 3
        o2 = (slot_arr + 2) % 3
        ok &= dec[rows, o1] & dec[rows, o2]
        ok &= (sgn[rows, o1].astype(int) * sgn[rows, o2].astype(int)) == -1
    if not ok.any():
        return out
    d = _line_dirs(t1[ok], t2[ok])
    dn = np.linalg.norm(d, axis=1)
    rows_ok = rows[ok]
    dirs = []
    margins = []
    for tri, det, slot_arr in ((t1, det1, i1), (t2, det2, i2)):
        sl = slot_arr[ok]
        o1 = (sl + 1) % 3
        o2 = (sl + 2) % 3
        r = rows_ok
        sa = det[r, o1]
        sb = det[r, o2]
        t = sa / (sa - sb)
        w = tri[r, o1] + t[:, None] * (tri[r, o2] - tri[r, o1])
        v = tri[r, sl]
        dirs.append(np.einsum("mj,mj->m", w - v, d))
        margins.append(_REL_MARGIN * np.linalg.norm(w - v, axis=1) * dn)
    opposite = ((dirs[0] > margins[0]) & (dirs[1] < -margins[1])) \
        | ((dirs[0] < -margins[0]) & (dirs[1] > margins[1]))
    out[rows_ok] = opposite
    return out


class BoundaryHit(Exception):
    def __init__(self, detail, pair):
        self.detail = detail
        self.pair = pair


def _classify_survivors(mesh, pairs):
    """Exact classification; raises BoundaryHit on the first degeneracy."""
    V = mesh.positions
    F = mesh.faces
    if len(pairs):
        reject, shared_count = _screen(V, F, pairs)
    else:
        reject = np.zeros(0, dtype=bool)
        shared_count = np.zeros(0, dtype=np.int8)
    keep = ~reject
    survivors = pairs[keep]
    surv_shared = shared_count[keep]
    segments = []
    exact_calls = 0
    from .predicates import orient3d_exact
    from .hgeom import hp3_from_floats, orient3d_h
    for (i, j), nshared in zip(survivors, surv_shared):
        i, j = int(i), int(j)
        shared = _shared_slots(F[i], F[j])
        exact_calls += 1
        if nshared == 2:
            # folded pair is a boundary case only when exactly coplanar
            opp2 = [j2 for _, j2 in shared]
            free2 = [k for k in range(3) if k not in opp2][0]
            if orient3d_exact(V[F[i]][0], V[F[i]][1], V[F[i]][2],
                              V[F[j]][free2]) != 0:
                continue
            r = tri_tri_intersect(V[F[i]], V[F[j]], shared=shared)
        else:
            r = tri_tri_intersect(V[F[i]], V[F[j]], shared=shared)
        if r.kind == BOUNDARY_CASE:
            raise BoundaryHit(r.boundary_detail, (i, j))
        if r.kind == PROPER_SEGMENT:
            segments.append((i, j, r.segment[0], r.segment[1]))
    return segments, exact_calls


def build_catalog(mesh, policy: PerturbationPolicy | None = None):
    """Intersection catalog of a mesh, perturbing past boundary cases.

    Returns (mesh, catalog): the mesh is the input copy after however many
    whole-mesh perturbations were needed (zero for generic inputs). The
    catalog holds proper segments only, registered under both faces.
    """
    policy = policy or PerturbationPolicy()
    t0 = time.perf_counter()
    current = mesh
    attempt = 0
    last_detail = None
    while True:
        pairs = broad_phase(current)
        try:
            segments, exact_calls = _classify_survivors(current, pairs)
            break
        except BoundaryHit as hit:
            last_detail = hit.detail
            attempt += 1
            if attempt > policy.max_retries:
                raise PerturbationRetryError(attempt - 1, hit.detail) from None
            current = perturb(current, policy, attempt)
    catalog = IntersectionCatalog()
    catalog.candidate_pairs = int(len(pairs))
    catalog.boundary_retries = attempt
    catalog.narrow_exact_calls = exact_calls
    for i, j, a, b in segments:
        catalog.segments.setdefault(i, []).append(IntersectionSegment(j, a, b))
        catalog.segments.setdefault(j, []).append(IntersectionSegment(i, a, b))
    catalog.proper_segments = len(segments)
    catalog.wall_time = time.perf_counter() - t0
    return current, catalog
