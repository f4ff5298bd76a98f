import numpy as np
import pytest

import shapes
from oracles import solid_angle_winding
from evomesh.aabb import AabbTree
from evomesh.mesh import SurfaceMesh
from evomesh.winding import (close_holes, find_seed, is_exterior_face,
                             winding_number, winding_query)


def flipped(mesh):
    return SurfaceMesh(mesh.positions, mesh.faces[:, [0, 2, 1]])


def test_cube_center_and_outside():
    cube = shapes.cube()
    assert winding_number((0.5, 0.5, 0.5), cube) == 1
    assert winding_number((10.0, 0.0, 0.0), cube) == 0


def test_nested_cubes():
    outer = shapes.cube(size=4.0, center=(0, 0, 0))
    inner = shapes.cube(size=1.0, center=(0, 0, 0))
    both = shapes.merged(outer, inner)
    assert winding_number((0.05, 0.04, 0.03), both) == 2
    both_inv = shapes.merged(outer, shapes.cube(size=1.0, center=(0, 0, 0), flip=True))
    assert winding_number((0.05, 0.04, 0.03), both_inv) == 0
    # between the shells
    assert winding_number((1.3, 0.2, 0.1), both_inv) == 1


def test_orientation_flip_negates():
    m = shapes.icosphere(2)
    tree = AabbTree(m.positions, m.faces)
    treef = AabbTree(m.positions, m.faces[:, [0, 2, 1]])
    rng = np.random.default_rng(5)
    for _ in range(50):
        p = rng.uniform(-1.5, 1.5, size=3)
        if abs(np.linalg.norm(p) - 1.0) < 0.05:
            continue
        assert winding_number(p, tree, seed=3) == -winding_number(p, treef, seed=3)


def test_ray_direction_independence():
    m = shapes.torus()
    tree = AabbTree(m.positions, m.faces)
    rng = np.random.default_rng(11)
    pts = [(2.0, 0.0, 0.0), (0.0, 0.0, 0.0), (2.0, 0.1, 0.2), (5.0, 5.0, 5.0)]
    for p in pts:
        vals = set()
        got = 0
        for k in range(100):
            d = rng.normal(size=3)
            d /= np.linalg.norm(d)
            faces, t, signs, degenerate = tree.ray_hits(np.asarray(p, float), d)
            if degenerate:
                continue
            got += 1
            vals.add(int(signs.sum()))
        assert got > 90
        assert len(vals) == 1


@pytest.mark.parametrize("maker", [
    lambda: shapes.icosphere(2),
    lambda: shapes.torus(),
    lambda: shapes.merged(shapes.cube(size=4.0, center=(0, 0, 0)),
                          shapes.cube(size=1.0, center=(0, 0, 0), flip=True)),
    lambda: flipped(shapes.icosphere(1)),
    lambda: shapes.merged(shapes.cube(), shapes.cube(center=(0.9, 0.7, 0.6))),
])
def test_agreement_with_solid_angle_oracle(maker):
    m = maker()
    tree = AabbTree(m.positions, m.faces)
    lo, hi = m.bounding_box()
    span = hi - lo
    rng = np.random.default_rng(17)
    checked = 0
    for k in range(300):
        p = lo - 0.2 * span + rng.uniform(size=3) * 1.4 * span
        expect = solid_angle_winding(p, m.positions, m.faces)
        assert winding_number(p, tree, seed=23, query_key=k) == expect
        checked += 1
    assert checked == 300


def test_exterior_faces_of_lone_cube():
    cube = shapes.cube()
    tree = AabbTree(cube.positions, cube.faces)
    for f in range(cube.n_faces):
        assert is_exterior_face(f, cube, tree=tree)


def test_inverted_inner_shell_faces_are_exterior():
    # hole-formation nesting: the inverted inner shell bounds a cavity with
    # winding 0, so its faces pass the exterior ray test
    outer = shapes.cube(size=4.0, center=(0, 0, 0))
    inner = shapes.cube(size=1.0, center=(0, 0, 0), flip=True)
    both = shapes.merged(outer, inner)
    tree = AabbTree(both.positions, both.faces)
    for f in range(outer.n_faces, both.n_faces):
        assert is_exterior_face(f, both, tree=tree)
    # a nested outward shell is not exterior
    both2 = shapes.merged(outer, shapes.cube(size=1.0, center=(0, 0, 0)))
    tree2 = AabbTree(both2.positions, both2.faces)
    for f in range(outer.n_faces, both2.n_faces):
        assert not is_exterior_face(f, both2, tree=tree2)


def test_find_seed_clean_sphere_and_exhaustion():
    m = shapes.icosphere(1)
    none_seg = np.zeros(m.n_faces, dtype=bool)
    visited = np.zeros(m.n_faces, dtype=bool)
    assert find_seed(m, none_seg, visited) == 0
    visited[:] = True
    assert find_seed(m, none_seg, visited) is None


def test_close_holes_noop_on_closed():
    m = shapes.icosphere(1)
    closed, closure = close_holes(m)
    assert closure.is_empty
    assert closed.n_faces == m.n_faces


def test_close_holes_plane_and_cylinder():
    plane = shapes.grid_plane(4, 4)
    closed, closure = close_holes(plane)
    boundary_len = 4 * 4  # 4 sides x 4 edges
    assert len(closure.center_vertices) == 1
    assert len(closure.fan_faces) == boundary_len
    assert not closed.has_boundary()
    assert closed.validate().is_manifold

    cyl = shapes.open_cylinder()
    closed, closure = close_holes(cyl)
    assert len(closure.center_vertices) == 2
    assert not closed.has_boundary()
    # winding far from the holes matches the solid-angle oracle on the closure
    tree = AabbTree(closed.positions, closed.faces)
    for k, p in enumerate([(0.0, 0.0, 0.0), (3.0, 0.0, 0.0), (0.9, 0.0, 0.0)]):
        expect = solid_angle_winding(p, closed.positions, closed.faces)
        assert winding_number(p, tree, seed=1, query_key=k) == expect


def test_winding_query_reports_hits():
    cube = shapes.cube()
    tree = AabbTree(cube.positions, cube.faces)
    q = winding_query((0.5, 0.5, 0.5), tree, seed=2)
    assert q.value == 1
    assert all(t > 0 for _, _, t in q.hits)
