from fractions import Fraction
from math import comb

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from conftest import random_cloud
from multicover.geometry import GeneralPositionError, PointCloud, min_sphere_constrained
from multicover.tiling import (
    Rhomboid,
    boundary_rhomboid,
    boundary_sliced,
    enumerate_rhomboids,
    faces,
    mosaic,
    slice_tiling,
    tiling_stats,
    truncate_tiling,
)

F = Fraction
X, Y, Z = (0,), (1,), (2,)
XY, XZ, YZ = (0, 1), (0, 2), (1, 2)


def constrained_r2(cloud, rho):
    on = [cloud.sites[i] for i in rho.x_on]
    ins = [cloud.sites[i] for i in rho.x_in]
    rest = set(range(cloud.n)) - set(rho.x_on) - set(rho.x_in)
    s = min_sphere_constrained(on, ins, [cloud.sites[i] for i in sorted(rest)])
    return None if s is None else s.radius_sq


# --- enumeration -------------------------------------------------------------

def test_collinear_five(line5):
    t = enumerate_rhomboids(line5)
    rho = t[((2,), (1, 3))]
    assert {v.subset for v in rho.vertices()} == {(2,), (1, 2), (2, 3), (1, 2, 3)}
    assert rho.r_val == 1
    assert len(t.tops()) == 10


def test_triangle_counts(triangle):
    t = enumerate_rhomboids(triangle)
    assert len(t) == 27
    assert sum(1 for c in t.cells.values() if c.dim_cell == 0) == 8
    tops = t.tops()
    assert len(tops) == 1 and tops[0].key == ((), (0, 1, 2)) and tops[0].r_val == 2


def test_too_few_sites():
    with pytest.raises(ValueError):
        enumerate_rhomboids(PointCloud.from_points([(0, 0), (1, 1)]))


def test_degenerate_cloud_rejected():
    with pytest.raises(GeneralPositionError):
        enumerate_rhomboids(PointCloud.from_points([(1, 0), (0, 1), (-1, 0), (0, -1), (3, 3)]))
    with pytest.raises(GeneralPositionError):
        enumerate_rhomboids(PointCloud.from_points([(0, 0), (1, 0), (2, 0), (5, 7)]))


@pytest.mark.parametrize("d,n,seed", [(1, 7, 0), (2, 6, 1), (2, 7, 2), (3, 6, 3)])
def test_rval_matches_constrained_solver(d, n, seed):
    cloud = random_cloud(n, d, seed)
    t = enumerate_rhomboids(cloud)
    for rho in t.cells.values():
        assert constrained_r2(cloud, rho) == rho.r_val, rho.key


@pytest.mark.parametrize("d,n,seed", [(2, 8, 4), (3, 7, 5)])
def test_face_monotonicity(d, n, seed):
    t = enumerate_rhomboids(random_cloud(n, d, seed))
    for key, rho in t.cells.items():
        for f in faces(rho):
            sigma = t[f]
            assert sigma.r_val <= rho.r_val
            assert sigma.k_min >= rho.k_min


@pytest.mark.parametrize("d,n,K,seed", [(1, 20, 3, 0), (2, 15, 2, 1), (2, 25, 3, 2), (2, 30, 4, 3), (3, 14, 2, 4)])
def test_pencil_walk_matches_brute_force(d, n, K, seed):
    cloud = random_cloud(n, d, seed)
    a = enumerate_rhomboids(cloud, max_depth=K, method="brute")
    b = enumerate_rhomboids(cloud, max_depth=K, method="pencil")
    assert a.cells == b.cells
    assert {k: set(v) for k, v in a.facets.items()} == {k: set(v) for k, v in b.facets.items()}


def test_depth_limited_is_restriction_of_full():
    cloud = random_cloud(9, 2, 7)
    full = enumerate_rhomboids(cloud)
    for K in (1, 2, 3):
        part = enumerate_rhomboids(cloud, max_depth=K)
        assert part.cells == {k: c for k, c in full.cells.items() if c.k_min <= K}


def test_truncate_tiling():
    cloud = random_cloud(8, 2, 8)
    t = enumerate_rhomboids(cloud)
    tr = truncate_tiling(t, 3)
    assert set(tr.cells) == {k for k, c in t.cells.items() if c.k_max <= 3}
    assert truncate_tiling(t, cloud.n).cells == t.cells
    with pytest.raises(ValueError):
        truncate_tiling(t, 0)


# --- faces and boundaries ---------------------------------------------------

def test_faces_counts():
    rho = Rhomboid((5,), (1, 2), F(1))
    fs = faces(rho)
    assert len(fs) == 9
    dims = sorted(len(on) for _, on in fs)
    assert dims == [0, 0, 0, 0, 1, 1, 1, 1, 2]
    assert faces(Rhomboid((1,), (), F(0))) == [((1,), ())]


def test_boundary_rhomboid():
    assert set(boundary_rhomboid(Rhomboid((), (3,), F(0)))) == {((), ()), ((3,), ())}
    assert len(boundary_rhomboid(Rhomboid((), (1, 2), F(0)))) == 4
    with pytest.raises(ValueError):
        boundary_rhomboid(Rhomboid((1,), (), F(0)))


def test_triangle_top_facets_realizable(triangle):
    t = enumerate_rhomboids(triangle)
    bd = boundary_rhomboid(t.tops()[0])
    assert len(bd) == 6
    for key in bd:
        assert constrained_r2(triangle, t[key]) is not None


@pytest.mark.parametrize("d,n,seed", [(1, 6, 0), (2, 7, 1), (3, 6, 2)])
def test_boundary_squares_to_zero(d, n, seed):
    t = enumerate_rhomboids(random_cloud(n, d, seed))
    for key, rho in t.cells.items():
        if rho.dim_cell < 2:
            continue
        acc = set()
        for f in boundary_rhomboid(rho):
            acc ^= set(boundary_rhomboid(f))
        assert not acc
    cells = slice_tiling(t)
    for c in cells.values():
        if c.dim < 2:
            continue
        acc = set()
        for f in boundary_sliced(c):
            acc ^= set(boundary_sliced(cells[f]))
        assert not acc, c


# --- sliced tiling ----------------------------------------------------------

def test_skew_prism_and_slices(triangle):
    cells = slice_tiling(enumerate_rhomboids(triangle))
    prism = cells[(X, Y, Z, XY, XZ, YZ)]
    assert prism.kind == "slab" and prism.dim == 3
    assert prism.r_val == 2 and prism.k_val == 1
    s1, s2 = cells[(X, Y, Z)], cells[(XY, XZ, YZ)]
    assert s1.kind == s2.kind == "slice"
    assert (s1.depth, s2.depth) == (1, 2)
    assert len(cells) == len({c.key for c in cells.values()})


def test_edge_gives_one_slab(line5):
    t = enumerate_rhomboids(line5)
    cells = slice_tiling(t)
    mine = [c for c in cells.values() if c.parent == ((2,), (3,))]
    assert len(mine) == 1 and mine[0].kind == "slab"


def test_boundary_sliced_examples(triangle):
    cells = slice_tiling(enumerate_rhomboids(triangle))
    # interior slice of a 2-rhomboid collapses to its two vertices
    sl = cells[(X, Y)]
    assert sl.kind == "slice" and sl.parent == ((), (0, 1))
    assert sorted(boundary_sliced(sl)) == [(X,), (Y,)]
    # the middle slab of the cube is an octahedron: 2 slices + 6 face slabs
    prism = cells[(X, Y, Z, XY, XZ, YZ)]
    bd = boundary_sliced(prism)
    assert len(bd) == 8
    assert sum(1 for f in bd if cells[f].kind == "slice") == 2
    edge_slab = cells[((), X)]
    assert sorted(boundary_sliced(edge_slab)) == [((),), (X,)]
    with pytest.raises(ValueError):
        boundary_sliced(cells[(X,)])


def test_mosaic_examples(triangle):
    cells = slice_tiling(enumerate_rhomboids(triangle))
    m = mosaic(cells, 1)
    assert sorted(len(c.vertices) for c in m) == [1, 1, 1, 2, 2, 2, 3]
    assert {c.key for c in m if len(c.vertices) == 3} == {(X, Y, Z)}
    top = mosaic(cells, 3)
    assert [c.key for c in top] == [((0, 1, 2),)]
    assert mosaic(cells, 3, F(1)) == []
    at0 = mosaic(cells, 1, F(0))
    assert sorted(c.key for c in at0) == [(X,), (Y,), (Z,)]


# --- statistics and bounds --------------------------------------------------

def test_stats_examples(triangle, line5):
    s = tiling_stats(enumerate_rhomboids(triangle))
    assert s.top_cells == 1 and s.total == 27 and s.bound == 128
    assert tiling_stats(enumerate_rhomboids(line5)).top_cells == comb(5, 2)


@settings(max_examples=15)
@given(st.integers(1, 3), st.integers(0, 10**6), st.data())
def test_cell_bound_and_top_count(d, seed, data):
    n = data.draw(st.integers(d + 1, 9 if d == 3 else 12))
    t = enumerate_rhomboids(random_cloud(n, d, seed))
    s = tiling_stats(t)
    assert s.total <= s.bound
    assert s.top_cells == comb(n, d + 1)


@pytest.mark.parametrize("seed", [0, 1])
def test_knn_sets_are_vertices(seed):
    cloud = random_cloud(8, 2, seed)
    verts = enumerate_rhomboids(cloud).vertex_subsets()
    rng = np.random.default_rng(seed)
    pts = cloud.float_coords
    q = rng.uniform(pts.min(0), pts.max(0), (2000, 2))
    order = np.argsort(((q[:, None, :] - pts[None]) ** 2).sum(-1), axis=1)
    for k in range(1, cloud.n + 1):
        for row in {tuple(sorted(r[:k])) for r in order.tolist()}:
            assert row in verts
