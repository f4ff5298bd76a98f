"""Halfedge triangle mesh with in-place topology edits.

Storage is array-based: face f owns the three halfedges 3f, 3f+1, 3f+2, where
halfedge 3f+k runs from corner k to corner (k+1) % 3. Twin links are explicit;
everything else (next, prev, face, origin) is implicit in the numbering.
Deletion marks rows dead; `compact()` renumbers. All bulk queries (normals,
areas, volumes) are vectorized over the live rows.
"""

from __future__ import annotations

import numpy as np

from .errors import MeshTopologyError

_GROW = 1.6


def _grown(arr, need, fill=0):
    cap = arr.shape[0]
    if need <= cap:
        return arr
    newcap = max(need, int(cap * _GROW) + 8)
    out = np.empty((newcap,) + arr.shape[1:], dtype=arr.dtype)
    out[:cap] = arr
    out[cap:] = fill
    return out


def pair_halfedges(faces, n_vertices):
    """Twin assignment for a triangle soup.

    Returns (twin, defects) where twin is an (F, 3) int64 array with -1 for
    unpaired halfedges and defects is a dict with 'multi' (edges carried by
    more than two halfedges) and 'orientation' (two halfedges running the
    same way). Defective edges are left unpaired.
    """
    nf = len(faces)
    twin = np.full((nf, 3), -1, dtype=np.int64)
    if nf == 0:
        return twin, {"multi": [], "orientation": []}
    f = np.asarray(faces, dtype=np.int64)
    origin = f.reshape(-1)
    dest = f[:, [1, 2, 0]].reshape(-1)
    lo = np.minimum(origin, dest)
    hi = np.maximum(origin, dest)
    key = lo * np.int64(n_vertices + 1) + hi
    order = np.argsort(key, kind="stable")
    sk = key[order]
    starts = np.flatnonzero(np.concatenate(([True], sk[1:] != sk[:-1])))
    ends = np.concatenate((starts[1:], [len(sk)]))
    sizes = ends - starts
    flat_twin = twin.reshape(-1)

    two = starts[sizes == 2]
    if len(two):
        h0 = order[two]
        h1 = order[two + 1]
        opposite = origin[h0] == dest[h1]
        g0, g1 = h0[opposite], h1[opposite]
        flat_twin[g0] = g1
        flat_twin[g1] = g0
        bad = ~opposite
    else:
        bad = np.zeros(0, dtype=bool)

    defects = {"multi": [], "orientation": []}
    if len(two) and bad.any():
        for s in two[bad]:
            hs = order[s:s + 2]
            defects["orientation"].append((int(lo[hs[0]]), int(hi[hs[0]]), [int(h) for h in hs]))
    for s, e in zip(starts[sizes > 2], ends[sizes > 2]):
        hs = order[s:e]
        defects["multi"].append((int(lo[hs[0]]), int(hi[hs[0]]), [int(h) for h in hs]))
    return twin, defects


class SurfaceMesh:
    """Oriented triangle mesh with halfedge connectivity."""

    def __init__(self, vertices, faces, twins=None, check=True):
        v = np.ascontiguousarray(np.asarray(vertices, dtype=np.float64)).reshape(-1, 3)
        f = np.ascontiguousarray(np.asarray(faces, dtype=np.int64)).reshape(-1, 3)
        if len(f) and (f.min() < 0 or f.max() >= len(v)):
            raise MeshTopologyError("face references a vertex out of range")
        self._v = v.copy()
        self._fv = f.copy()
        self._nv = len(v)
        self._nf = len(f)
        self._valive = np.ones(self._nv, dtype=bool)
        self._falive = np.ones(self._nf, dtype=bool)
        if twins is None:
            self._twin, self._defects = pair_halfedges(self._fv, self._nv)
            if check and self._defects["multi"]:
                u, w, _ = self._defects["multi"][0]
                raise MeshTopologyError(
                    f"edge ({u}, {w}) is shared by more than two faces")
        else:
            self._twin = np.asarray(twins, dtype=np.int64).reshape(-1, 3).copy()
            self._defects = {"multi": [], "orientation": []}
        self._vout = np.full(self._nv, -1, dtype=np.int64)
        if self._nf:
            h = np.arange(self._nf * 3, dtype=np.int64)
            self._vout[self._fv.reshape(-1)[::-1]] = h[::-1]  # first halfedge wins
        self._dirty = False
        self.load_report = None

    # -- construction helpers ----------------------------------------------

    @classmethod
    def empty(cls):
        return cls(np.zeros((0, 3)), np.zeros((0, 3), dtype=np.int64))

    def copy(self):
        self.compact()
        m = SurfaceMesh.__new__(SurfaceMesh)
        m._v = self._v[:self._nv].copy()
        m._fv = self._fv[:self._nf].copy()
        m._twin = self._twin[:self._nf].copy()
        m._nv = self._nv
        m._nf = self._nf
        m._valive = np.ones(m._nv, dtype=bool)
        m._falive = np.ones(m._nf, dtype=bool)
        m._vout = self._vout[:self._nv].copy()
        m._defects = {k: list(v) for k, v in self._defects.items()}
        m._dirty = False
        m.load_report = None
        return m

    @staticmethod
    def concatenate(meshes):
        """Join meshes into one (disjoint union of components)."""
        vs, fs, off = [], [], 0
        for m in meshes:
            m.compact()
            vs.append(m.positions.copy())
            fs.append(m.faces + off)
            off += m.n_vertices
        if not vs:
            return SurfaceMesh.empty()
        return SurfaceMesh(np.vstack(vs), np.vstack(fs))

    # -- compaction ----------------------------------------------------------

    def compact(self):
        if not self._dirty:
            return self
        vmap = np.cumsum(self._valive[:self._nv]) - 1
        fmap = np.cumsum(self._falive[:self._nf]) - 1
        live_f = self._falive[:self._nf]
        live_v = self._valive[:self._nv]
        new_fv = vmap[self._fv[:self._nf][live_f]]
        old_twin = self._twin[:self._nf][live_f]
        tw_face = old_twin // 3
        tw_slot = old_twin % 3
        new_twin = np.where(old_twin >= 0, fmap[tw_face] * 3 + tw_slot, -1)
        self._v = self._v[:self._nv][live_v].copy()
        self._fv = new_fv
        self._twin = new_twin
        self._nv = len(self._v)
        self._nf = len(self._fv)
        self._valive = np.ones(self._nv, dtype=bool)
        self._falive = np.ones(self._nf, dtype=bool)
        self._vout = np.full(self._nv, -1, dtype=np.int64)
        if self._nf:
            h = np.arange(self._nf * 3, dtype=np.int64)
            self._vout[self._fv.reshape(-1)[::-1]] = h[::-1]
        self._dirty = False
        return self

    # -- basic accessors -----------------------------------------------------

    @property
    def positions(self):
        self.compact()
        return self._v[:self._nv]

    @property
    def faces(self):
        self.compact()
        return self._fv[:self._nf]

    @property
    def twins(self):
        self.compact()
        return self._twin[:self._nf]

    @property
    def n_vertices(self):
        if not self._dirty:
            return self._nv
        return int(self._valive[:self._nv].sum())

    @property
    def n_faces(self):
        if not self._dirty:
            return self._nf
        return int(self._falive[:self._nf].sum())

    @property
    def n_edges(self):
        t = self.twins.reshape(-1)
        h = np.arange(len(t))
        return int(np.count_nonzero((t == -1) | (h < t)))

    def __repr__(self):
        return f"SurfaceMesh({self.n_vertices} vertices, {self.n_faces} faces)"

    # -- halfedge navigation (valid on a compact mesh) -----------------------

    def origin(self, h):
        return int(self._fv[h // 3, h % 3])

    def dest(self, h):
        return int(self._fv[h // 3, (h % 3 + 1) % 3])

    @staticmethod
    def next_halfedge(h):
        return (h // 3) * 3 + (h % 3 + 1) % 3

    @staticmethod
    def prev_halfedge(h):
        return (h // 3) * 3 + (h % 3 + 2) % 3

    def twin(self, h):
        return int(self._twin[h // 3, h % 3])

    def halfedge_of_vertex(self, v):
        return int(self._vout[v])

    def is_boundary_vertex(self, v):
        for h in self.vertex_star(v):
            if self.twin(h) == -1:
                return True
            if self.twin(self.prev_halfedge(h)) == -1:
                return True
        return False

    def vertex_star(self, v):
        """Outgoing halfedges around vertex v (handles open fans)."""
        h0 = int(self._vout[v])
        if h0 == -1:
            return
        # rewind to a boundary start if there is one
        h = h0
        while True:
            p = self.prev_halfedge(h)
            t = self.twin(p)
            if t == -1:
                break
            h = t
            if h == h0:
                break
        start = h
        while True:
            yield h
            t = self.twin(h)
            if t == -1:
                return
            h = self.next_halfedge(t)
            if h == start:
                return

    def vertex_neighbors(self, v):
        out = []
        for h in self.vertex_star(v):
            out.append(self.dest(h))
            p = self.prev_halfedge(h)
            if self.twin(p) == -1:
                out.append(self.origin(p))
        seen = set()
        uniq = [x for x in out if not (x in seen or seen.add(x))]
        return uniq

    def vertex_face_count(self, v):
        return sum(1 for _ in self.vertex_star(v))

    # -- geometry -------------------------------------------------------------

    def face_corners(self):
        return self.positions[self.faces]

    def face_cross(self):
        c = self.face_corners()
        return np.cross(c[:, 1] - c[:, 0], c[:, 2] - c[:, 0])

    def face_areas(self):
        return 0.5 * np.linalg.norm(self.face_cross(), axis=1)

    def face_normals(self):
        cr = self.face_cross()
        n = np.linalg.norm(cr, axis=1)
        bad = n == 0.0
        n[bad] = 1.0
        return cr / n[:, None]

    def vertex_normals(self):
        """Area-weighted average of incident face normals, unit length."""
        cr = self.face_cross()
        acc = np.zeros((self.n_vertices, 3))
        f = self.faces
        for k in range(3):
            np.add.at(acc, f[:, k], cr)
        n = np.linalg.norm(acc, axis=1)
        zero = n == 0.0
        n[zero] = 1.0
        return acc / n[:, None]

    def edge_representatives(self):
        """One halfedge id per undirected edge (boundary or lower id)."""
        t = self.twins.reshape(-1)
        h = np.arange(len(t))
        return h[(t == -1) | (h < t)]

    def edge_lengths(self, halfedges=None):
        if halfedges is None:
            halfedges = self.edge_representatives()
        f = halfedges // 3
        k = halfedges % 3
        p = self.positions
        a = p[self.faces[f, k]]
        b = p[self.faces[f, (k + 1) % 3]]
        return np.linalg.norm(b - a, axis=1)

    def mean_edge_length(self):
        le = self.edge_lengths()
        return float(le.mean()) if len(le) else 0.0

    def vertex_mean_edge_length(self):
        """Mean incident edge length per vertex."""
        reps = self.edge_representatives()
        f = reps // 3
        k = reps % 3
        u = self.faces[f, k]
        w = self.faces[f, (k + 1) % 3]
        le = np.linalg.norm(self.positions[u] - self.positions[w], axis=1)
        acc = np.zeros(self.n_vertices)
        cnt = np.zeros(self.n_vertices)
        np.add.at(acc, u, le)
        np.add.at(acc, w, le)
        np.add.at(cnt, u, 1.0)
        np.add.at(cnt, w, 1.0)
        cnt[cnt == 0] = 1.0
        return acc / cnt

    def has_boundary(self):
        return bool((self.twins == -1).any())

    def boundary_loops(self):
        """Boundary halfedges grouped into loops (each listed tail to head)."""
        t = self.twins.reshape(-1)
        boundary = set(int(h) for h in np.flatnonzero(t == -1))
        nxt = {}
        by_origin = {}
        for h in boundary:
            by_origin[self.dest(h)] = h  # boundary loop runs against face orientation
        loops = []
        remaining = set(boundary)
        while remaining:
            h0 = remaining.pop()
            loop = [h0]
            h = h0
            while True:
                h = by_origin.get(self.origin(h))
                if h is None or h == h0:
                    break
                if h not in remaining:
                    break
                remaining.discard(h)
                loop.append(h)
            loops.append(loop)
        return loops

    def signed_volume(self):
        """Divergence-theorem volume; positive for outward orientation."""
        if self.has_boundary():
            raise MeshTopologyError("signed volume is undefined for an open mesh")
        c = self.face_corners()
        return float(np.einsum("ij,ij->", c[:, 0], np.cross(c[:, 1], c[:, 2])) / 6.0)

    def euler_characteristic(self):
        return self.n_vertices - self.n_edges + self.n_faces

    def bounding_box(self):
        p = self.positions
        if not len(p):
            z = np.zeros(3)
            return z, z
        return p.min(axis=0), p.max(axis=0)

    # -- components ------------------------------------------------------------

    def face_component_labels(self):
        """Connected-component label per face (adjacency through twins)."""
        self.compact()
        nf = self.n_faces
        labels = np.full(nf, -1, dtype=np.int64)
        twin = self._twin[:nf]
        comp = 0
        for f0 in range(nf):
            if labels[f0] != -1:
                continue
            stack = [f0]
            labels[f0] = comp
            while stack:
                f = stack.pop()
                for k in range(3):
                    t = twin[f, k]
                    if t != -1:
                        g = t // 3
                        if labels[g] == -1:
                            labels[g] = comp
                            stack.append(g)
            comp += 1
        return labels, comp

    def submesh(self, face_mask):
        """New mesh with the selected faces and only their vertices."""
        self.compact()
        face_mask = np.asarray(face_mask)
        if face_mask.dtype != bool:
            m = np.zeros(self.n_faces, dtype=bool)
            m[face_mask] = True
            face_mask = m
        fv = self.faces[face_mask]
        used = np.zeros(self.n_vertices, dtype=bool)
        used[fv.reshape(-1)] = True
        vmap = np.cumsum(used) - 1
        return SurfaceMesh(self.positions[used], vmap[fv])

    def connected_components(self):
        labels, n = self.face_component_labels()
        return [self.submesh(labels == i) for i in range(n)]

    # -- topology edits ---------------------------------------------------------

    def _set_twin_pair(self, a, b):
        if a != -1:
            self._twin[a // 3, a % 3] = b
        if b != -1:
            self._twin[b // 3, b % 3] = a

    def _new_vertex(self, p):
        self._v = _grown(self._v, self._nv + 1)
        self._valive = _grown(self._valive, self._nv + 1, fill=False)
        self._vout = _grown(self._vout, self._nv + 1, fill=-1)
        self._v[self._nv] = p
        self._valive[self._nv] = True
        self._vout[self._nv] = -1
        self._nv += 1
        return self._nv - 1

    def _new_face(self, a, b, c):
        self._fv = _grown(self._fv, self._nf + 1)
        self._twin = _grown(self._twin, self._nf + 1, fill=-1)
        self._falive = _grown(self._falive, self._nf + 1, fill=False)
        self._fv[self._nf] = (a, b, c)
        self._twin[self._nf] = (-1, -1, -1)
        self._falive[self._nf] = True
        self._nf += 1
        return self._nf - 1

    def duplicate_vertex(self, v):
        return self._new_vertex(self._v[v])

    def set_corner(self, f, k, v):
        self._fv[f, k] = v

    def flip_edge(self, h):
        """Flip interior edge h; caller is responsible for validity guards."""
        t = self.twin(h)
        if t == -1:
            raise MeshTopologyError("cannot flip a boundary edge")
        f, g = h // 3, t // 3
        u = self.origin(h)
        v = self.dest(h)
        a = self.dest(self.next_halfedge(h))
        b = self.dest(self.next_halfedge(t))
        A = self.twin(self.next_halfedge(h))   # v -> a
        B = self.twin(self.prev_halfedge(h))   # a -> u
        C = self.twin(self.next_halfedge(t))   # u -> b
        D = self.twin(self.prev_halfedge(t))   # b -> v
        self._fv[f] = (u, b, a)
        self._fv[g] = (b, v, a)
        self._set_twin_pair(3 * f + 0, C)
        self._set_twin_pair(3 * f + 1, 3 * g + 2)
        self._set_twin_pair(3 * f + 2, B)
        self._set_twin_pair(3 * g + 0, D)
        self._set_twin_pair(3 * g + 1, A)
        self._vout[u] = 3 * f + 0
        self._vout[b] = 3 * f + 1
        self._vout[a] = 3 * f + 2
        self._vout[v] = 3 * g + 1

    def split_edge(self, h, point=None):
        """Split edge h at point (midpoint by default); returns the new vertex."""
        u = self.origin(h)
        v = self.dest(h)
        if point is None:
            point = 0.5 * (self._v[u] + self._v[v])
        t = self.twin(h)
        f = h // 3
        a = self.dest(self.next_halfedge(h))
        A = self.twin(self.next_halfedge(h))   # v -> a
        B = self.twin(self.prev_halfedge(h))   # a -> u
        m = self._new_vertex(point)
        # face f becomes (u, m, a); new face f2 = (m, v, a)
        # halfedge ids: f: 0 u->m, 1 m->a, 2 a->u ; f2: 0 m->v, 1 v->a, 2 a->m
        self._fv[f] = (u, m, a)
        f2 = self._new_face(m, v, a)
        self._set_twin_pair(3 * f2 + 1, A)
        self._set_twin_pair(3 * f + 1, 3 * f2 + 2)
        self._set_twin_pair(3 * f + 2, B)
        if t == -1:
            self._twin[f, 0] = -1
            self._twin[f2, 0] = -1
            self._vout[m] = 3 * f2 + 0
            self._vout[u] = 3 * f + 0
            self._vout[v] = 3 * f2 + 1
            self._vout[a] = 3 * f2 + 2
            return m
        g = t // 3
        b = self.dest(self.next_halfedge(t))
        C = self.twin(self.next_halfedge(t))   # u -> b
        D = self.twin(self.prev_halfedge(t))   # b -> v
        # face g (v, u, b) becomes (v, m, b); new face g2 = (m, u, b)
        self._fv[g] = (v, m, b)
        g2 = self._new_face(m, u, b)
        # ids: g: 0 v->m, 1 m->b, 2 b->v ; g2: 0 m->u, 1 u->b, 2 b->m
        self._set_twin_pair(3 * f + 0, 3 * g2 + 0)
        self._set_twin_pair(3 * f2 + 0, 3 * g + 0)
        self._set_twin_pair(3 * g + 1, 3 * g2 + 2)
        self._set_twin_pair(3 * g + 2, D)
        self._set_twin_pair(3 * g2 + 1, C)
        self._vout[m] = 3 * f2 + 0
        self._vout[u] = 3 * f + 0
        self._vout[v] = 3 * f2 + 1
        self._vout[a] = 3 * f2 + 2
        self._vout[b] = 3 * g2 + 2
        return m

    def can_collapse(self, h):
        """Link condition plus pinch guards for collapsing edge h."""
        t = self.twin(h)
        u = self.origin(h)
        v = self.dest(h)
        nu = set(self.vertex_neighbors(u))
        nv = set(self.vertex_neighbors(v))
        opposite = {self.dest(self.next_halfedge(h))}
        if t != -1:
            opposite.add(self.dest(self.next_halfedge(t)))
        if nu & nv != opposite:
            return False
        u_bnd = self.is_boundary_vertex(u)
        v_bnd = self.is_boundary_vertex(v)
        if t != -1 and u_bnd and v_bnd:
            return False  # interior edge between two boundary vertices pinches
        # collapsing below a tetrahedron flattens the component
        if t != -1 and self.vertex_face_count(u) <= 3 and self.vertex_face_count(v) <= 3:
            return False
        return True

    def collapse_edge(self, h, point=None):
        """Collapse edge h into its origin vertex; dest vertex is removed.

        Assumes can_collapse(h). Returns the surviving vertex id.
        """
        t = self.twin(h)
        u = self.origin(h)
        v = self.dest(h)
        if point is None:
            point = 0.5 * (self._v[u] + self._v[v])
        star_v = list(self.vertex_star(v))
        star_u = list(self.vertex_star(u))
        f = h // 3
        dead = {f}
        ears = []
        # face f: (u, v, a): outer halfedges v->a and a->u
        A = self.twin(self.next_halfedge(h))
        B = self.twin(self.prev_halfedge(h))
        ears.append((A, B))
        if t != -1:
            g = t // 3
            dead.add(g)
            C = self.twin(self.next_halfedge(t))   # u -> b
            D = self.twin(self.prev_halfedge(t))   # b -> v
            ears.append((D, C))
        for hh in star_v:
            ff = hh // 3
            if ff not in dead:
                self._fv[ff, hh % 3] = u
        for ff in dead:
            self._falive[ff] = False
        for x, y in ears:
            self._set_twin_pair(x, y)
        self._valive[v] = False
        self._v[u] = point
        # vout of every vertex of the two stars may have pointed into a dead
        # face or at a reassigned origin; repoint from the surviving faces.
        touched = {hh // 3 for hh in star_v} | {hh // 3 for hh in star_u}
        for ff in touched:
            if not self._falive[ff]:
                continue
            for k in range(3):
                w = self._fv[ff, k]
                cur = self._vout[w]
                if cur == -1 or not self._falive[cur // 3] \
                        or self._fv[cur // 3, cur % 3] != w:
                    self._vout[w] = 3 * ff + k
        self._dirty = True
        return u

    def validate(self, check_self_intersections=False, allow_boundary=False,
                 area_eps=1e-8):
        from .validation import validate_mesh
        return validate_mesh(self, check_self_intersections=check_self_intersections,
                             allow_boundary=allow_boundary, area_eps=area_eps)

    def adjacent_vertices(self, u, v):
        return v in self.vertex_neighbors(u)

    def delete_faces(self, face_ids):
        """Remove faces; twins of surviving neighbors become boundary."""
        for f in np.atleast_1d(face_ids):
            f = int(f)
            if not self._falive[f]:
                continue
            for k in range(3):
                t = self._twin[f, k]
                if t != -1:
                    self._twin[t // 3, t % 3] = -1
            self._falive[f] = False
        # drop isolated vertices
        used = np.zeros(self._nv, dtype=bool)
        live = self._falive[:self._nf]
        used[self._fv[:self._nf][live].reshape(-1)] = True
        self._valive[:self._nv] &= used
        self._dirty = True


def _face_degeneracy(corners, area_eps):
    """(is_degenerate, shortest_slot, longest_slot) per face."""
    e = np.stack([corners[:, 1] - corners[:, 0],
                  corners[:, 2] - corners[:, 1],
                  corners[:, 0] - corners[:, 2]], axis=1)
    lengths = np.linalg.norm(e, axis=2)
    area = 0.5 * np.linalg.norm(np.cross(e[:, 0], -e[:, 2]), axis=1)
    mean = lengths.mean(axis=1)
    degenerate = area <= area_eps * mean * mean
    return degenerate, lengths.argmin(axis=1), lengths.argmax(axis=1)


def remove_degenerate_triangles(mesh, area_eps=1e-8, max_passes=12):
    """Eliminate (near-)zero-area faces in place.

    Needles collapse their short edge; caps flip their long edge first. A
    face that cannot be fixed without breaking manifoldness is left alone
    and its id is returned (ids refer to the compacted output mesh).

    The threshold is relative: a face is degenerate when
    area <= area_eps * (mean edge length of the face)^2.
    """
    for _ in range(max_passes):
        mesh.compact()
        if mesh.n_faces == 0:
            return []
        degenerate, short_slot, long_slot = _face_degeneracy(
            mesh.face_corners(), area_eps)
        offenders = np.flatnonzero(degenerate)
        if not len(offenders):
            return []
        changed = False
        for f in offenders:
            f = int(f)
            if not mesh._falive[f]:
                continue
            h_short = 3 * f + int(short_slot[f])
            if mesh.can_collapse(h_short):
                mesh.collapse_edge(h_short)
                changed = True
                continue
            # cap: flip the long edge so the flat vertex gains area
            h_long = 3 * f + int(long_slot[f])
            t = mesh.twin(h_long)
            if t != -1:
                a = mesh.dest(mesh.next_halfedge(h_long))
                b = mesh.dest(mesh.next_halfedge(t))
                if a != b and not mesh.adjacent_vertices(a, b):
                    mesh.flip_edge(h_long)
                    changed = True
        if not changed:
            break
    mesh.compact()
    degenerate, _, _ = _face_degeneracy(mesh.face_corners(), area_eps)
    return [int(f) for f in np.flatnonzero(degenerate)]
