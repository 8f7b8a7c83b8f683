"""Brute-force ground truth: the nerve of k-wise ball intersections.

For k-subsets A_0..A_j the radius-r balls around every site of A_0 u ... u A_j
share a point iff the minimum enclosing ball of that union has radius <= r.
So each simplex of the nerve gets its critical radius from one miniball, and
miniballs are cached per union (at most 2^n of them).
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache

from .bifiltration import Bigrade, BigradedComplex, _assemble
from .geometry import PointCloud, miniball
from .homology import Barcode, persistence_fixed_k

MAX_SITES = 12


@dataclass
class CechMulticoverComplex:
    k: int
    max_dim: int
    vertices: list[tuple[int, ...]]  # k-subsets in lexicographic order
    simplices: dict[tuple[int, ...], Fraction] = field(default_factory=dict)  # vertex ids -> r^2

    def critical(self, simplex: tuple[int, ...]) -> Fraction:
        return self.simplices[simplex]

    def as_complex(self) -> BigradedComplex:
        items = []
        for s, r2 in self.simplices.items():
            key = tuple(self.vertices[v] for v in s)
            bd = [tuple(self.vertices[v] for v in s[:i] + s[i + 1:]) for i in range(len(s))] if len(s) > 1 else []
            items.append((key, len(s) - 1, bd, (Bigrade(r2, self.k),), self.k))
        return _assemble("cech-oracle", items)


class _MebCache:
    def __init__(self, cloud: PointCloud):
        self.cloud = cloud
        self.cache: dict[int, Fraction] = {}

    def __call__(self, mask: int) -> Fraction:
        r2 = self.cache.get(mask)
        if r2 is None:
            pts = [self.cloud.sites[i] for i in range(self.cloud.n) if mask >> i & 1]
            r2 = self.cache[mask] = miniball(pts).radius_sq
        return r2


_caches: dict[int, _MebCache] = {}


def _meb_cache(cloud: PointCloud) -> _MebCache:
    c = _caches.get(id(cloud))
    if c is None or c.cloud is not cloud:
        if len(_caches) > 32:
            _caches.clear()
        c = _caches[id(cloud)] = _MebCache(cloud)
    return c


def _check(cloud: PointCloud, k: int, allow_large: bool):
    if not 1 <= k <= cloud.n:
        raise ValueError(f"k must lie in [1, {cloud.n}], got {k}")
    if cloud.n > MAX_SITES and not allow_large:
        raise ValueError(f"oracle limited to {MAX_SITES} sites (got {cloud.n}); pass allow_large=True")


def cech_multicover_nerve(cloud: PointCloud, k: int, max_dim: int, allow_large: bool = False) -> CechMulticoverComplex:
    _check(cloud, k, allow_large)
    if max_dim < 0:
        raise ValueError("max_dim must be nonnegative")
    meb = _meb_cache(cloud)
    verts = list(itertools.combinations(range(cloud.n), k))
    masks = [sum(1 << i for i in v) for v in verts]
    out = CechMulticoverComplex(k, max_dim, verts)
    for size in range(1, max_dim + 2):
        for s in itertools.combinations(range(len(verts)), size):
            m = 0
            for v in s:
                m |= masks[v]
            out.simplices[s] = meb(m)
    return out


@lru_cache(maxsize=256)
def _persistence(cloud: PointCloud, k: int, max_dim: int, allow_large: bool) -> Barcode:
    nerve = cech_multicover_nerve(cloud, k, max_dim + 1, allow_large)
    return persistence_fixed_k(nerve.as_complex(), k, max_dim)


def oracle_barcode(cloud: PointCloud, k: int, i: int, max_dim: int | None = None, allow_large: bool = False) -> Barcode:
    """Persistence of the critical-radius filtration of the nerve, in degree i.

    ``max_dim`` is the nerve dimension cap and must be at least i + 1.
    """
    if max_dim is None:
        max_dim = i + 1
    if i + 1 > max_dim:
        raise ValueError(f"H_{i} needs simplices up to dimension {i + 1}, cap is {max_dim}")
    full = _persistence(cloud, k, max_dim - 1, allow_large)
    return Barcode({i: full[i]})


def oracle_betti(cloud: PointCloud, r2, k: int, i: int, max_dim: int | None = None, allow_large: bool = False) -> int:
    """Betti number of the multicover at squared radius r2 and depth k."""
    if k < 1:
        raise ValueError("oracle needs k >= 1")
    if k > cloud.n:
        return 0
    return oracle_barcode(cloud, k, i, max_dim, allow_large).betti(i, r2)
