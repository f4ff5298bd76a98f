"""Constrained Delaunay triangulation inside a single triangle.

Points are homogeneous integer 2-D coordinates, predicates are exact, and
all inserted points lie inside or on the root triangle. Built for the local
re-triangulation of intersected faces: the face's own sides and every
intersection sub-segment become constraint edges, so a traversal can flood
sub-triangles and stop exactly on constraints.
"""

from __future__ import annotations

from . import hgeom as hg
from .errors import GeometryError


class ConstrainedTriangulation:
    """Incremental CDT with exact arithmetic.

    Triangles are CCW index triples. `adjacent[t][k]` is the triangle across
    edge (tri[k], tri[k+1]) or -1 on the hull; `constraint[t][k]` carries an
    opaque label (None when unconstrained). Dead triangles stay in the lists
    with alive[t] = False.
    """

    def __init__(self, corners):
        a, b, c = (hg.hp2_normalize(p) for p in corners)
        if hg.orient2d_h(a, b, c) <= 0:
            raise GeometryError("root triangle must be counterclockwise")
        self.points = [a, b, c]
        self.tris = [[0, 1, 2]]
        self.adjacent = [[-1, -1, -1]]
        self.constraint = [[None, None, None]]
        self.alive = [True]
        self._vertex_tri = {0: 0, 1: 0, 2: 0}

    # -- queries ---------------------------------------------------------

    def live_triangles(self):
        return [t for t in range(len(self.tris)) if self.alive[t]]

    def _orient(self, i, j, p):
        return hg.orient2d_h(self.points[i], self.points[j], p)

    def _orient_idx(self, i, j, k):
        return hg.orient2d_h(self.points[i], self.points[j], self.points[k])

    def locate(self, p):
        """(triangle, on_edge_slot or None) for a point inside the domain."""
        t = self._vertex_tri[0]
        if not self.alive[t]:
            t = self.live_triangles()[0]
        visited = 0
        limit = 4 * len(self.tris) + 16
        while True:
            visited += 1
            if visited > limit:
                raise GeometryError("point location did not terminate")
            tri = self.tris[t]
            on_edge = None
            moved = False
            for k in range(3):
                s = self._orient(tri[k], tri[(k + 1) % 3], p)
                if s < 0:
                    nxt = self.adjacent[t][k]
                    if nxt == -1:
                        raise GeometryError("point lies outside the root triangle")
                    t = nxt
                    moved = True
                    break
                if s == 0:
                    on_edge = k
            if not moved:
                return t, on_edge

    def edge_slot(self, t, u, v):
        tri = self.tris[t]
        for k in range(3):
            if tri[k] == u and tri[(k + 1) % 3] == v:
                return k
        return None

    def find_edge(self, u, v):
        """(t, k) such that tris[t] carries directed edge u -> v, else None."""
        for t in self._triangles_at(u):
            k = self.edge_slot(t, u, v)
            if k is not None:
                return t, k
        return None

    def _triangles_at(self, u):
        """All live triangles incident to vertex u (twin walk both ways)."""
        t0 = self._vertex_tri.get(u, -1)
        if t0 == -1 or not self.alive[t0] or u not in self.tris[t0]:
            return [t for t in self.live_triangles() if u in self.tris[t]]
        out = [t0]
        seen = {t0}
        t = t0
        while True:   # rotate across edge (prev, u)
            k = self.tris[t].index(u)
            nxt = self.adjacent[t][(k + 2) % 3]
            if nxt == -1 or nxt in seen:
                break
            out.append(nxt)
            seen.add(nxt)
            t = nxt
        t = t0
        while True:   # rotate across edge (u, next)
            k = self.tris[t].index(u)
            nxt = self.adjacent[t][k]
            if nxt == -1 or nxt in seen:
                break
            out.append(nxt)
            seen.add(nxt)
            t = nxt
        return out

    # -- structure edits ---------------------------------------------------

    def _new_tri(self, verts):
        self.tris.append(list(verts))
        self.adjacent.append([-1, -1, -1])
        self.constraint.append([None, None, None])
        self.alive.append(True)
        for v in verts:
            self._vertex_tri[v] = len(self.tris) - 1
        return len(self.tris) - 1

    def _twin_slot(self, t, k):
        s = self.adjacent[t][k]
        if s == -1:
            return None
        u = self.tris[t][k]
        v = self.tris[t][(k + 1) % 3]
        k2 = self.edge_slot(s, v, u)
        if k2 is None:
            raise GeometryError("adjacency out of sync")
        return s, k2

    def _relink(self, neighbor, u, v, new_t, new_k, label):
        """Point `neighbor`'s (u, v) slot at new_t and mirror the label."""
        self.adjacent[new_t][new_k] = neighbor
        self.constraint[new_t][new_k] = label
        if neighbor == -1:
            return
        k = self.edge_slot(neighbor, u, v)
        if k is None:
            raise GeometryError("adjacency out of sync")
        self.adjacent[neighbor][k] = new_t
        self.constraint[neighbor][k] = label

    def insert_point(self, p):
        """Insert a point inside the domain; returns its index.

        The point must not coincide with an existing vertex (dedupe first).
        """
        p = hg.hp2_normalize(p)
        idx = len(self.points)
        t, on_edge = self.locate(p)
        self.points.append(p)
        if on_edge is None:
            dirty = self._split_interior(t, idx)
        else:
            dirty = self._split_on_edge(t, on_edge, idx)
        self._legalize(dirty)
        return idx

    def _split_interior(self, t, idx):
        a, b, c = self.tris[t]
        adj = self.adjacent[t][:]
        con = self.constraint[t][:]
        self.alive[t] = False
        t0 = self._new_tri((a, b, idx))
        t1 = self._new_tri((b, c, idx))
        t2 = self._new_tri((c, a, idx))
        self._relink(adj[0], b, a, t0, 0, con[0])
        self._relink(adj[1], c, b, t1, 0, con[1])
        self._relink(adj[2], a, c, t2, 0, con[2])
        for tt, nxt, prv in ((t0, t1, t2), (t1, t2, t0), (t2, t0, t1)):
            self.adjacent[tt][1] = nxt
            self.adjacent[tt][2] = prv
        return [(t0, 0), (t1, 0), (t2, 0)]

    def _split_on_edge(self, t, k, idx):
        """Split edge (u, v) = slot k of t (and its twin) at the new vertex."""
        label = self.constraint[t][k]
        twin = self._twin_slot(t, k)
        dirty = []

        def split_one(tt, kk):
            a = self.tris[tt][kk]
            b = self.tris[tt][(kk + 1) % 3]
            c = self.tris[tt][(kk + 2) % 3]
            adj = self.adjacent[tt][:]
            con = self.constraint[tt][:]
            self.alive[tt] = False
            left = self._new_tri((a, idx, c))
            right = self._new_tri((idx, b, c))
            # left edges: (a,idx) half of split edge, (idx,c) inner, (c,a) old
            self.constraint[left][0] = label
            self._relink(adj[(kk + 2) % 3], a, c, left, 2, con[(kk + 2) % 3])
            self.constraint[right][0] = label
            self._relink(adj[(kk + 1) % 3], c, b, right, 1, con[(kk + 1) % 3])
            self.adjacent[left][1] = right
            self.adjacent[right][2] = left
            dirty.append((left, 2))
            dirty.append((right, 1))
            return left, right

        l1, r1 = split_one(t, k)
        if twin is None:
            return dirty
        s, k2 = twin
        l2, r2 = split_one(s, k2)
        # (u, idx) of t-side pairs with (idx, u) of s-side and vice versa
        self.adjacent[l1][0] = r2
        self.adjacent[r2][0] = l1
        self.adjacent[r1][0] = l2
        self.adjacent[l2][0] = r1
        return dirty

    def _legalize(self, stack):
        guard = 0
        while stack:
            guard += 1
            if guard > 64 * (len(self.tris) + 4):
                raise GeometryError("legalization did not terminate")
            t, k = stack.pop()
            if not self.alive[t] or self.constraint[t][k] is not None:
                continue
            twin = self._twin_slot(t, k)
            if twin is None:
                continue
            s, k2 = twin
            apex_s = self.tris[s][(k2 + 2) % 3]
            a, b, c = self.tris[t]
            if hg.incircle_h(self.points[a], self.points[b], self.points[c],
                             self.points[apex_s]) > 0:
                t1, t2 = self.flip(t, k)
                stack += [(t1, 0), (t1, 2), (t2, 0), (t2, 1)]

    def flip(self, t, k):
        """Flip the unconstrained edge at (t, k); returns the two new tris."""
        s, k2 = self._twin_slot(t, k)
        u = self.tris[t][k]
        v = self.tris[t][(k + 1) % 3]
        c = self.tris[t][(k + 2) % 3]
        d = self.tris[s][(k2 + 2) % 3]
        adj_t = self.adjacent[t][:]
        con_t = self.constraint[t][:]
        adj_s = self.adjacent[s][:]
        con_s = self.constraint[s][:]
        self.alive[t] = False
        self.alive[s] = False
        t1 = self._new_tri((u, d, c))
        t2 = self._new_tri((d, v, c))
        # t1 edges: (u,d) from s's (u,d)-side, (d,c) diagonal, (c,u) from t
        self._relink(adj_s[(k2 + 1) % 3], d, u, t1, 0, con_s[(k2 + 1) % 3])
        self._relink(adj_t[(k + 2) % 3], u, c, t1, 2, con_t[(k + 2) % 3])
        # t2 edges: (d,v) from s, (v,c) from t, (c,d) diagonal
        self._relink(adj_s[(k2 + 2) % 3], v, d, t2, 0, con_s[(k2 + 2) % 3])
        self._relink(adj_t[(k + 1) % 3], c, v, t2, 1, con_t[(k + 1) % 3])
        self.adjacent[t1][1] = t2
        self.adjacent[t2][2] = t1
        return t1, t2

    # -- constraints -------------------------------------------------------

    def insert_constraint(self, u, v, label):
        """Force edge (u, v) into the triangulation and label it.

        No existing vertex may lie on the open segment and no other
        constraint may cross it (the caller pre-splits crossings), so
        flipping flippable crossing diagonals terminates.
        """
        if u == v:
            raise GeometryError("zero-length constraint")
        guard = 0
        while True:
            guard += 1
            if guard > 16 * (len(self.tris) + 16):
                raise GeometryError("constraint insertion did not terminate")
            found = self.find_edge(u, v) or self.find_edge(v, u)
            if found is not None:
                t, k = found
                self.constraint[t][k] = label
                tw = self._twin_slot(t, k)
                if tw is not None:
                    self.constraint[tw[0]][tw[1]] = label
                return
            crossings = [(t, k) for t in self.live_triangles() for k in range(3)
                         if self._crosses_segment(t, k, u, v)]
            if not crossings:
                raise GeometryError("constraint segment crosses no edge")
            progressed = False
            for t, k in crossings:
                if not self.alive[t]:
                    continue
                if self.constraint[t][k] is not None:
                    raise GeometryError("constraint crosses another constraint")
                s, k2 = self._twin_slot(t, k)
                a = self.tris[t][k]
                b = self.tris[t][(k + 1) % 3]
                c = self.tris[t][(k + 2) % 3]
                d = self.tris[s][(k2 + 2) % 3]
                if self._orient_idx(a, d, c) > 0 and self._orient_idx(d, b, c) > 0:
                    self.flip(t, k)
                    progressed = True
                    break
            if not progressed:
                raise GeometryError("constraint insertion is stuck")

    def _crosses_segment(self, t, k, u, v):
        a = self.tris[t][k]
        b = self.tris[t][(k + 1) % 3]
        if a in (u, v) or b in (u, v):
            return False
        pu, pv = self.points[u], self.points[v]
        o1 = hg.orient2d_h(pu, pv, self.points[a])
        o2 = hg.orient2d_h(pu, pv, self.points[b])
        if o1 == 0 or o2 == 0 or (o1 > 0) == (o2 > 0):
            return False
        o3 = self._orient(a, b, pu)
        o4 = self._orient(a, b, pv)
        return o3 != 0 and o4 != 0 and (o3 > 0) != (o4 > 0)

    def mark_existing_edge(self, u, v, label):
        found = self.find_edge(u, v) or self.find_edge(v, u)
        if found is None:
            raise GeometryError(f"edge ({u}, {v}) is not in the triangulation")
        t, k = found
        self.constraint[t][k] = label
        tw = self._twin_slot(t, k)
        if tw is not None:
            self.constraint[tw[0]][tw[1]] = label
