"""Bounding-volume tree over mesh faces for ray queries.

A flat median-split tree stored in numpy arrays. Ray traversal collects
candidate faces from the boxes the ray pierces, then runs one vectorized
ray-triangle pass over the candidates. Hits report the crossing sign
(ray direction against face normal) and a degeneracy flag for rays that
pass suspiciously close to an edge, vertex, or a grazing plane.
"""

from __future__ import annotations

import numpy as np

_LEAF_SIZE = 8
_BARY_EPS = 1e-9      # barycentric safety margin
_PARALLEL_EPS = 1e-12


class AabbTree:
    def __init__(self, vertices, faces, leaf_size=_LEAF_SIZE):
        self.V = np.asarray(vertices, dtype=np.float64)
        self.F = np.asarray(faces, dtype=np.int64).reshape(-1, 3)
        nf = len(self.F)
        corners = self.V[self.F] if nf else np.zeros((0, 3, 3))
        self.box_lo = corners.min(axis=1) if nf else np.zeros((0, 3))
        self.box_hi = corners.max(axis=1) if nf else np.zeros((0, 3))
        centers = (self.box_lo + self.box_hi) / 2
        self.order = np.arange(nf)
        self.scale = float(np.linalg.norm(self.box_hi.max(axis=0) - self.box_lo.min(axis=0))) if nf else 1.0
        if self.scale == 0.0:
            self.scale = 1.0

        n_lo, n_hi, n_left, n_right, n_start, n_count = [], [], [], [], [], []

        def new_node():
            n_lo.append(None)
            n_hi.append(None)
            n_left.append(-1)
            n_right.append(-1)
            n_start.append(-1)
            n_count.append(0)
            return len(n_lo) - 1

        if nf:
            stack = [(new_node(), 0, nf)]
            while stack:
                node, s, e = stack.pop()
                idx = self.order[s:e]
                n_lo[node] = self.box_lo[idx].min(axis=0)
                n_hi[node] = self.box_hi[idx].max(axis=0)
                if e - s <= leaf_size:
                    n_start[node] = s
                    n_count[node] = e - s
                    continue
                c = centers[idx]
                axis = int(np.argmax(c.max(axis=0) - c.min(axis=0)))
                mid = (e - s) // 2
                part = np.argpartition(c[:, axis], mid)
                self.order[s:e] = idx[part]
                left = new_node()
                right = new_node()
                n_left[node] = left
                n_right[node] = right
                stack.append((left, s, s + mid))
                stack.append((right, s + mid, e))

        self.n_lo = np.array([x if x is not None else np.zeros(3) for x in n_lo])
        self.n_hi = np.array([x if x is not None else np.zeros(3) for x in n_hi])
        self.n_left = np.asarray(n_left, dtype=np.int64)
        self.n_right = np.asarray(n_right, dtype=np.int64)
        self.n_start = np.asarray(n_start, dtype=np.int64)
        self.n_count = np.asarray(n_count, dtype=np.int64)

    def ray_candidates(self, origin, direction):
        """Face ids whose boxes the ray (t >= 0) pierces."""
        if not len(self.F):
            return np.zeros(0, dtype=np.int64)
        o = np.asarray(origin, dtype=np.float64)
        d = np.asarray(direction, dtype=np.float64)
        inv = np.where(d != 0.0, 1.0 / np.where(d == 0.0, 1.0, d), np.inf)
        out = []
        stack = [0]
        n_lo, n_hi = self.n_lo, self.n_hi
        while stack:
            node = stack.pop()
            lo = n_lo[node]
            hi = n_hi[node]
            tmin, tmax = 0.0, np.inf
            ok = True
            for ax in range(3):
                if d[ax] == 0.0:
                    if o[ax] < lo[ax] or o[ax] > hi[ax]:
                        ok = False
                        break
                    continue
                t1 = (lo[ax] - o[ax]) * inv[ax]
                t2 = (hi[ax] - o[ax]) * inv[ax]
                if t1 > t2:
                    t1, t2 = t2, t1
                tmin = max(tmin, t1)
                tmax = min(tmax, t2)
                if tmin > tmax:
                    ok = False
                    break
            if not ok:
                continue
            if self.n_left[node] == -1:
                s = self.n_start[node]
                out.append(self.order[s:s + self.n_count[node]])
            else:
                stack.append(self.n_left[node])
                stack.append(self.n_right[node])
        if not out:
            return np.zeros(0, dtype=np.int64)
        return np.concatenate(out)

    def ray_hits(self, origin, direction, exclude=None, exclude_mask=None):
        """All transversal crossings along the open ray t > 0.

        Returns (face_ids, t, signs, degenerate). `signs` is the sign of
        direction . face normal per hit. `degenerate` is True when any
        candidate was too close to call (caller should redraw the ray).
        `exclude` drops one face id; `exclude_mask` drops a boolean set.
        """
        cand = self.ray_candidates(origin, direction)
        if exclude is not None:
            cand = cand[cand != exclude]
        if exclude_mask is not None:
            cand = cand[~exclude_mask[cand]]
        if not len(cand):
            return cand, np.zeros(0), np.zeros(0, dtype=np.int8), False
        o = np.asarray(origin, dtype=np.float64)
        d = np.asarray(direction, dtype=np.float64)
        tri = self.V[self.F[cand]]
        a, b, c = tri[:, 0], tri[:, 1], tri[:, 2]
        e1 = b - a
        e2 = c - a
        p = np.cross(d, e2)
        det = np.einsum("ij,ij->i", e1, p)
        norm1 = np.linalg.norm(e1, axis=1)
        norm2 = np.linalg.norm(e2, axis=1)
        parallel_band = _PARALLEL_EPS * norm1 * norm2
        s = o - a
        u = np.einsum("ij,ij->i", s, p)
        q = np.cross(s, e1)
        v = d @ q.T
        t = np.einsum("ij,ij->i", e2, q)

        with np.errstate(divide="ignore", invalid="ignore"):
            inv = np.where(det != 0.0, 1.0 / np.where(det == 0.0, 1.0, det), np.inf)
            u = u * inv
            v = v * inv
            t = t * inv
            nonparallel = np.abs(det) > parallel_band
            t_eps = 1e-12 * self.scale
            inside = (u > _BARY_EPS) & (v > _BARY_EPS) & (u + v < 1.0 - _BARY_EPS)
            outside = (u < -_BARY_EPS) | (v < -_BARY_EPS) | (u + v > 1.0 + _BARY_EPS)
        hit = nonparallel & inside & (t > t_eps)
        clean_miss = (nonparallel & outside) \
            | (nonparallel & inside & (t < -t_eps)) \
            | (~nonparallel & ~_near_plane(s, e1, e2, norm1, norm2))
        degenerate = bool((~(hit | clean_miss)).any())
        faces = cand[hit]
        tt = t[hit]
        # det = det[e1; d; e2] = -(d . n) with n = e1 x e2, so the crossing
        # sign (direction against the face normal) is -sign(det)
        signs = np.where(det[hit] > 0, -1, 1).astype(np.int8)
        order = np.argsort(tt)
        return faces[order], tt[order], signs[order], degenerate


def _near_plane(s, e1, e2, norm1, norm2):
    """For near-parallel rays: does the origin lie close to the triangle plane?"""
    n = np.cross(e1, e2)
    nn = norm1 * norm2
    nn = np.where(nn == 0.0, 1.0, nn)
    dist = np.abs(np.einsum("ij,ij->i", s, n)) / nn
    return dist < 1e-9 * np.linalg.norm(s, axis=1).clip(min=1.0)
