import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from conftest import random_cloud
from multicover.bifiltration import Bigrade, BigradedComplex, build_rhomb, build_sdel, build_srhomb
from multicover.generators import GeneratorSpec, generate
from multicover.geometry import PointCloud, miniball
from multicover.homology import (
    Gf2Matrix,
    barcode_fixed_k,
    betti_at_grade,
    euler_at_grade,
    hilbert,
    rank_bits,
    reduce,
)
from multicover.tiling import enumerate_rhomboids, slice_tiling

F = Fraction
INF = math.inf


def dense_rank_mod2(cols, n_rows):
    """Row-echelon rank of a 0/1 numpy matrix over GF(2)."""
    a = np.zeros((n_rows, len(cols)), dtype=np.uint8)
    for j, col in enumerate(cols):
        for r in col:
            a[r, j] = 1
    rank = 0
    for c in range(a.shape[1]):
        piv = next((r for r in range(rank, n_rows) if a[r, c]), None)
        if piv is None:
            continue
        a[[rank, piv]] = a[[piv, rank]]
        for r in range(n_rows):
            if r != rank and a[r, c]:
                a[r] ^= a[rank]
        rank += 1
    return rank


# --- reduction --------------------------------------------------------------

def test_reduce_zero_and_identity():
    red, piv = reduce(Gf2Matrix([[], [], []], 3))
    assert red.columns == [[], [], []] and piv == {}
    eye = Gf2Matrix([[0], [1], [2]], 3)
    red, piv = reduce(eye)
    assert red.columns == eye.columns and piv == {0: 0, 1: 1, 2: 2}


def test_reduce_hollow_triangle():
    m = Gf2Matrix([[0, 1], [1, 2], [0, 2]], 3)
    red, piv = reduce(m)
    assert len(piv) == 2
    assert red.columns[2] == []
    # one independent 1-cycle: 3 edges minus rank 2
    assert 3 - len(piv) == 1


def test_gf2_matrix_requires_sorted_rows():
    with pytest.raises(ValueError):
        Gf2Matrix([[2, 1]])


@given(st.lists(st.lists(st.integers(0, 11), unique=True).map(sorted), max_size=14))
def test_reduce_rank_matches_dense_elimination(cols):
    red, piv = reduce(Gf2Matrix(cols, 12))
    assert len(piv) == dense_rank_mod2(cols, 12)
    assert rank_bits(Gf2Matrix(cols).bits()) == len(piv)
    lows = [max(c) for c in red.columns if c]
    assert len(lows) == len(set(lows))


# --- grade-wise Betti numbers ----------------------------------------------

def _single_vertex():
    return BigradedComplex("rhomb", [0], [()], [(Bigrade(F(0), 1),)], [((0,),)], [1])


def test_betti_single_vertex():
    assert betti_at_grade(_single_vertex(), Bigrade(F(0), 1), 0) == 1
    with pytest.raises(ValueError):
        betti_at_grade(_single_vertex(), Bigrade(F(0), 1), -1)


def test_betti_triangle(triangle):
    R = build_rhomb(enumerate_rhomboids(triangle))
    g = Bigrade(F(10**6), 1)
    assert betti_at_grade(R, g, 0) == 1
    assert betti_at_grade(R, g, 1) == 0


def test_betti_two_sites_depth_two():
    R = build_rhomb(enumerate_rhomboids(PointCloud.from_points([0, 2])))
    assert betti_at_grade(R, Bigrade(F(99, 100), 2), 0) == 0
    assert betti_at_grade(R, Bigrade(F(1), 2), 0) == 1


# --- barcodes ---------------------------------------------------------------

def test_barcode_two_sites():
    R = build_rhomb(enumerate_rhomboids(PointCloud.from_points([0, 2])))
    assert barcode_fixed_k(R, 1, 0).multiset(0) == [(F(0), F(1)), (F(0), INF)]
    assert barcode_fixed_k(R, 2, 0).multiset(0) == [(F(1), INF)]
    assert barcode_fixed_k(R, 3, 0).multiset(0) == []


@pytest.mark.parametrize("seed", [0, 1, 2])
def test_barcode_consistent_with_betti(seed):
    cloud = random_cloud(7, 2, seed)
    R = build_rhomb(enumerate_rhomboids(cloud))
    R2 = miniball(cloud.sites).radius_sq
    for k in (1, 2, 3):
        for i in (0, 1):
            bc = barcode_fixed_k(R, k, i)
            assert all(b < d for b, d in bc[i])
            for j in range(30):
                r2 = R2 * j / 25
                assert bc.betti(i, r2) == betti_at_grade(R, Bigrade(r2, k), i)


# --- Hilbert grids ----------------------------------------------------------

def test_hilbert_single_point(triangle):
    R = build_rhomb(enumerate_rhomboids(triangle))
    h = hilbert(R, [F(1)], [1], [0])
    assert h.values.shape == (1, 1, 1)
    assert h.at(0, 1, 0) == betti_at_grade(R, Bigrade(F(1), 1), 0)


def test_hilbert_rejects_empty_grid(triangle):
    with pytest.raises(ValueError):
        hilbert(build_rhomb(enumerate_rhomboids(triangle)), [], [1], [0])


@pytest.mark.parametrize("seed", [3, 4])
def test_hilbert_models_agree_and_match_betti(seed):
    cloud = random_cloud(6, 2, seed)
    t = enumerate_rhomboids(cloud)
    sl = slice_tiling(t)
    R2 = miniball(cloud.sites).radius_sq
    grid = [R2 * j * j / 225 for j in range(16)]
    ks, dims = [1, 2, 3, 4], [0, 1]
    hs = [hilbert(c, grid, ks, dims) for c in (build_rhomb(t), build_srhomb(sl), build_sdel(sl))]
    assert np.array_equal(hs[0].values, hs[1].values)
    assert np.array_equal(hs[0].values, hs[2].values)
    R = build_rhomb(t)
    for ri, r2 in enumerate(grid):
        for k in ks:
            for i in dims:
                assert hs[0].at(ri, k, i) == betti_at_grade(R, Bigrade(r2, k), i)


def test_hilbert_changes_only_at_cell_grades():
    cloud = random_cloud(7, 2, 5)
    R = build_rhomb(enumerate_rhomboids(cloud))
    radii = sorted({g.r2 for gs in R.grades for g in gs})
    # two grid points strictly between each pair of consecutive critical radii
    grid = []
    for a, b in zip(radii, radii[1:]):
        grid += [a + (b - a) / 3, a + 2 * (b - a) / 3]
    h = hilbert(R, grid, [1, 2, 3], [0, 1])
    assert np.array_equal(h.values[:, :, 0::2], h.values[:, :, 1::2])


def test_annulus_shows_a_loop():
    cloud = generate(GeneratorSpec("annulus", 40, err=0.02, seed=1))
    R = build_rhomb(enumerate_rhomboids(cloud, max_depth=4), 4)
    grid = [F(j * j, 40 * 40) * F(1, 4) for j in range(40)]  # radii up to 0.25
    h = hilbert(R, grid, [1, 2], [1])
    assert h.values[0, 0].max() >= 1
    # the loop is born and later filled, so the grid is nonzero in a band
    row = h.values[0, 0]
    assert row[0] == 0 and row[-1] == 0


# --- invariants -------------------------------------------------------------

@settings(max_examples=8)
@given(st.integers(0, 10**6), st.integers(5, 7))
def test_top_homology_vanishes_and_euler(seed, n):
    cloud = random_cloud(n, 2, seed)
    t = enumerate_rhomboids(cloud)
    sl = slice_tiling(t)
    rng = np.random.default_rng(seed)
    R2 = miniball(cloud.sites).radius_sq
    for c in (build_rhomb(t), build_srhomb(sl), build_sdel(sl)):
        for _ in range(6):
            g = Bigrade(R2 * F(int(rng.integers(0, 60)), 40), int(rng.integers(1, n + 1)))
            betti = [betti_at_grade(c, g, i) for i in range(c.top_dim + 1)]
            assert all(b == 0 for b in betti[cloud.dim:])
            assert sum((-1) ** i * b for i, b in enumerate(betti)) == euler_at_grade(c, g)
