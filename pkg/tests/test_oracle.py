import math
from fractions import Fraction
from math import comb

import numpy as np
import pytest

from conftest import random_cloud
from multicover.bifiltration import Bigrade, build_rhomb
from multicover.geometry import PointCloud, miniball
from multicover.homology import barcode_fixed_k, betti_at_grade
from multicover.oracle import cech_multicover_nerve, oracle_barcode, oracle_betti
from multicover.tiling import enumerate_rhomboids

F = Fraction
INF = math.inf
TWO = PointCloud.from_points([0, 2])


def test_nerve_two_sites():
    n2 = cech_multicover_nerve(TWO, 2, 1)
    assert n2.vertices == [(0, 1)] and n2.simplices == {(0,): F(1)}
    n1 = cech_multicover_nerve(TWO, 1, 1)
    assert n1.simplices == {(0,): 0, (1,): 0, (0, 1): 1}


def test_nerve_right_triangle(triangle):
    nv = cech_multicover_nerve(triangle, 1, 2)
    edges = sorted(r for s, r in nv.simplices.items() if len(s) == 2)
    assert edges == [1, 1, 2]
    assert nv.simplices[(0, 1, 2)] == 2


def test_nerve_errors(triangle):
    with pytest.raises(ValueError):
        cech_multicover_nerve(triangle, 0, 1)
    with pytest.raises(ValueError):
        cech_multicover_nerve(triangle, 4, 1)
    big = random_cloud(13, 2, 0)
    with pytest.raises(ValueError):
        cech_multicover_nerve(big, 1, 1)
    assert len(cech_multicover_nerve(big, 12, 0, allow_large=True).vertices) == 13
    with pytest.raises(ValueError):
        oracle_betti(triangle, F(1), 1, 1, max_dim=1)


def test_oracle_betti_at_zero():
    cloud = random_cloud(7, 2, 1)
    assert oracle_betti(cloud, F(0), 1, 0) == 7


def test_oracle_barcode_examples():
    assert oracle_barcode(TWO, 1, 0).multiset(0) == [(F(0), F(1)), (F(0), INF)]
    cloud = random_cloud(6, 2, 2)
    assert oracle_barcode(cloud, 6, 0).multiset(0) == [(miniball(cloud.sites).radius_sq, INF)]


@pytest.mark.parametrize("k", [1, 2, 3])
def test_nerve_radii_monotone(k):
    cloud = random_cloud(6, 2, 3)
    nv = cech_multicover_nerve(cloud, k, 2)
    assert sum(1 for s in nv.simplices if len(s) == 1) == comb(6, k)
    for s, r2 in nv.simplices.items():
        for j in range(len(s)):
            face = s[:j] + s[j + 1:]
            if face:
                assert nv.simplices[face] <= r2


def test_oracle_matches_rhomb_on_random_grades():
    cloud = random_cloud(6, 2, 4)
    R = build_rhomb(enumerate_rhomboids(cloud))
    R2 = miniball(cloud.sites).radius_sq
    rng = np.random.default_rng(4)
    for _ in range(20):
        r2 = R2 * F(int(rng.integers(0, 50)), 40)
        k = int(rng.integers(1, 7))
        for i in (0, 1):
            assert oracle_betti(cloud, r2, k, i) == betti_at_grade(R, Bigrade(r2, k), i)


def test_oracle_barcode_matches_rhomb_seven_points():
    cloud = random_cloud(7, 2, 5)
    R = build_rhomb(enumerate_rhomboids(cloud))
    assert oracle_barcode(cloud, 2, 1).multiset(1) == barcode_fixed_k(R, 2, 1).multiset(1)


def test_oracle_one_dimensional():
    cloud = PointCloud.from_points([0, 1, 3, 7, 8])
    R = build_rhomb(enumerate_rhomboids(cloud))
    for k in range(1, 6):
        assert oracle_barcode(cloud, k, 0).multiset(0) == barcode_fixed_k(R, k, 0).multiset(0)
