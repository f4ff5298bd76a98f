import numpy as np
import pytest

import shapes
from evomesh import hgeom as hg
from evomesh.errors import PerturbationRetryError
from evomesh.intersect import IntersectionCatalog, broad_phase, build_catalog
from evomesh.kernel import PerturbationPolicy
from evomesh.validation import self_intersections_brute


def oracle_pairs(mesh):
    return set(map(tuple, self_intersections_brute(mesh.positions, mesh.faces)))


def test_broad_phase_disjoint_spheres():
    m = shapes.merged(shapes.icosphere(1), shapes.icosphere(1, center=(10, 0, 0)))
    pairs = broad_phase(m)
    nf1 = 80
    cross = [(i, j) for i, j in pairs if (i < nf1) != (j < nf1)]
    assert cross == []


def test_broad_phase_superset_of_oracle():
    m = shapes.merged(shapes.cube(), shapes.cube(center=(0.9, 0.66, 0.71)))
    pairs = set(map(tuple, broad_phase(m)))
    truth = oracle_pairs(m)
    assert truth
    assert truth <= pairs
    assert len(pairs) >= len(truth)


def test_broad_phase_tetrahedron_only_adjacency():
    m = shapes.tetrahedron()
    pairs = broad_phase(m)
    assert len(pairs) == 6  # all face pairs of a tetra touch by box
    current, cat = build_catalog(m)
    assert cat.proper_segments == 0
    assert cat.segments == {}


def test_catalog_clean_sphere_empty():
    m = shapes.icosphere(2)
    out, cat = build_catalog(m)
    assert cat.segments == {}
    assert cat.boundary_retries == 0
    assert np.array_equal(out.positions, m.positions)


def test_catalog_generic_cube_pair_matches_oracle():
    m = shapes.merged(shapes.cube(), shapes.cube(center=(0.9, 0.66, 0.71)))
    out, cat = build_catalog(m)
    assert cat.boundary_retries == 0
    assert cat.face_pairs() == oracle_pairs(out)
    # segments have distinct endpoints and are registered symmetrically
    for f, segs in cat.segments.items():
        for s in segs:
            assert s.a != s.b
            back = [t for t in cat.segments[s.partner]
                    if t.partner == f and {t.a, t.b} == {s.a, s.b}]
            assert back


def test_catalog_axis_offset_cubes_requires_retry():
    m = shapes.merged(shapes.cube(), shapes.cube(center=(1.0, 0.5, 0.5)))
    out, cat = build_catalog(m, PerturbationPolicy(delta=1e-6))
    assert cat.boundary_retries >= 1
    assert cat.proper_segments > 0
    assert cat.face_pairs() == oracle_pairs(out)


def test_catalog_determinism():
    m = shapes.merged(shapes.cube(), shapes.cube(center=(1.0, 0.5, 0.5)))
    out1, cat1 = build_catalog(m, PerturbationPolicy(delta=1e-6))
    out2, cat2 = build_catalog(m, PerturbationPolicy(delta=1e-6))
    assert np.array_equal(out1.positions, out2.positions)
    assert cat1.face_pairs() == cat2.face_pairs()
    for f in cat1.segments:
        s1 = [(s.partner, s.a, s.b) for s in cat1.segments[f]]
        s2 = [(s.partner, s.a, s.b) for s in cat2.segments[f]]
        assert s1 == s2


def test_retries_exhausted_raises():
    # two identical coincident cubes can never be separated by a fixed
    # number of offsets along identical normals
    m = shapes.merged(shapes.cube(), shapes.cube())
    with pytest.raises(PerturbationRetryError):
        build_catalog(m, PerturbationPolicy(delta=1e-9, max_retries=2))


@pytest.mark.parametrize("seed,amp", [(0, 0.25), (3, 0.35), (8, 0.3)])
def test_fuzzed_sphere_catalog_matches_oracle(seed, amp):
    rng = np.random.default_rng(seed)
    m = shapes.sinusoidal_deform(shapes.icosphere(3), amp, rng)
    out, cat = build_catalog(m)
    assert cat.face_pairs() == oracle_pairs(out)


def test_segment_endpoints_lie_on_both_planes():
    m = shapes.merged(shapes.cube(), shapes.cube(center=(0.9, 0.66, 0.71)))
    out, cat = build_catalog(m)
    from evomesh.kernel import tri_hpoints
    V, F = out.positions, out.faces
    for f, segs in cat.segments.items():
        pl_f = hg.plane_through(*tri_hpoints(V[F[f]]))
        for s in segs:
            pl_g = hg.plane_through(*tri_hpoints(V[F[s.partner]]))
            for p in (s.a, s.b):
                assert hg.plane_eval(pl_f, p) == 0
                assert hg.plane_eval(pl_g, p) == 0
