"""Combinatorial rhomboid tiling, its sliced refinement and order-k mosaics.

A rhomboid is stored by its key ``(x_in, x_on)`` of sorted site-index tuples;
its vertices are the sets ``x_in | Q`` for ``Q`` a subset of ``x_on``.
Squared radii are exact ``Fraction`` values throughout.
"""
from __future__ import annotations

import itertools
import logging
from collections import Counter, defaultdict
from dataclasses import dataclass, field
from fractions import Fraction
from math import comb
from typing import Iterable

import numpy as np

from .geometry import (
    DegenerateInputError,
    GeneralPositionError,
    PointCloud,
    PositionReport,
    support_sphere,
)

log = logging.getLogger(__name__)

Key = tuple[tuple[int, ...], tuple[int, ...]]
VertexSet = tuple[tuple[int, ...], ...]

# above this many (d+1)-subsets, depth-limited enumeration walks sphere pencils
BRUTE_FORCE_LIMIT = 20000


def vertex_order(v: tuple[int, ...]):
    return (len(v), v)


def canonical(vertices: Iterable[tuple[int, ...]]) -> VertexSet:
    return tuple(sorted(set(vertices), key=vertex_order))


def _merge(a: tuple[int, ...], b: tuple[int, ...]) -> tuple[int, ...]:
    return tuple(sorted(a + b))


def vertices_at_depth(x_in: tuple[int, ...], x_on: tuple[int, ...], depth: int) -> list[tuple[int, ...]]:
    j = depth - len(x_in)
    if j < 0 or j > len(x_on):
        return []
    return [_merge(x_in, q) for q in itertools.combinations(x_on, j)]


@dataclass(frozen=True)
class RhomboidVertex:
    subset: tuple[int, ...]

    @property
    def depth(self) -> int:
        return len(self.subset)


@dataclass(frozen=True)
class Rhomboid:
    x_in: tuple[int, ...]
    x_on: tuple[int, ...]
    r_val: Fraction

    @property
    def key(self) -> Key:
        return (self.x_in, self.x_on)

    @property
    def dim_cell(self) -> int:
        return len(self.x_on)

    @property
    def k_min(self) -> int:
        return len(self.x_in)

    @property
    def k_max(self) -> int:
        return len(self.x_in) + len(self.x_on)

    def vertices(self) -> list[RhomboidVertex]:
        return [
            RhomboidVertex(_merge(self.x_in, q))
            for j in range(len(self.x_on) + 1)
            for q in itertools.combinations(self.x_on, j)
        ]

    def vertex_set(self) -> VertexSet:
        return canonical(v.subset for v in self.vertices())


def faces(rho: Rhomboid | Key) -> list[Key]:
    """All 3^|x_on| faces, obtained by splitting x_on into in/on/out; includes rho."""
    x_in, x_on = rho.key if isinstance(rho, Rhomboid) else rho
    out = []
    for labels in itertools.product((0, 1, 2), repeat=len(x_on)):
        extra = tuple(p for p, l in zip(x_on, labels) if l == 0)
        on = tuple(p for p, l in zip(x_on, labels) if l == 1)
        out.append((_merge(x_in, extra), on))
    return out


def boundary_rhomboid(rho: Rhomboid | Key) -> list[Key]:
    """Codim-1 faces: move one x_on site into x_in or out of the cell."""
    x_in, x_on = rho.key if isinstance(rho, Rhomboid) else rho
    if not x_on:
        raise ValueError("a vertex has no boundary")
    res = []
    for p in x_on:
        rest = tuple(q for q in x_on if q != p)
        res.append((_merge(x_in, (p,)), rest))
        res.append((x_in, rest))
    return res


@dataclass
class RhomboidTiling:
    """Rhomboid tiling of a point cloud.

    ``depth_limit`` = K means the tiling holds exactly the cells with
    ``k_min <= K`` (all of them, with exact radii).  ``max_depth`` = K marks a
    truncated tiling holding the cells with ``k_max <= K``.  Both are None for
    the full tiling.
    """
    cloud: PointCloud
    cells: dict[Key, Rhomboid]
    facets: dict[Key, tuple[Key, ...]]
    depth_limit: int | None = None
    max_depth: int | None = None

    def __len__(self):
        return len(self.cells)

    def __contains__(self, key):
        return key in self.cells

    def __getitem__(self, key) -> Rhomboid:
        return self.cells[key]

    def tops(self) -> list[Rhomboid]:
        top = self.cloud.dim + 1
        return [c for c in self.cells.values() if c.dim_cell == top]

    def vertex_subsets(self) -> set[tuple[int, ...]]:
        return {c.x_in for c in self.cells.values() if not c.x_on}


# ---------------------------------------------------------------------------
# enumeration

def _classify_top(cloud: PointCloud, top: tuple[int, ...]):
    try:
        ss = support_sphere(cloud, top)
    except DegenerateInputError:
        raise GeneralPositionError(PositionReport(False, "affine", top, exhaustive=False)) from None
    sides = ss.sides(cloud)
    on = np.flatnonzero(sides == 0)
    if len(on) != len(top):
        extra = next(int(j) for j in on if j not in top)
        raise GeneralPositionError(PositionReport(False, "cospherical", tuple(sorted(top + (extra,))), False))
    x_in = tuple(int(j) for j in np.flatnonzero(sides < 0))
    return x_in, ss.radius_sq


def _tops_brute_force(cloud: PointCloud, limit: int | None):
    tops = {}
    for top in itertools.combinations(range(cloud.n), cloud.dim + 1):
        x_in, r2 = _classify_top(cloud, top)
        if limit is None or len(x_in) <= limit:
            tops[(x_in, top)] = r2
    return tops


def _pencil(cloud: PointCloud, D: tuple[int, ...]):
    """Float parametrisation of the spheres through the sites D.

    Centres are m + t*u (u unit normal to aff(D)); site p is inside the
    sphere at parameter t iff h_p - 2 t s_p < 0.  Returns (s, t) arrays.
    """
    X = cloud.float_coords
    A = X[list(D)]
    d = cloud.dim
    if d == 1:
        m, u = A[0], np.array([1.0])
    else:
        V = A[1:] - A[0]
        lam = np.linalg.solve(V @ V.T, 0.5 * np.einsum("ij,ij->i", V, V))
        m = A[0] + lam @ V
        if d == 2:
            u = np.array([-V[0, 1], V[0, 0]])
        else:
            u = np.cross(V[0], V[1])
        u = u / np.linalg.norm(u)
    Y = X - m
    s = Y @ u
    h = np.einsum("ij,ij->i", Y, Y) - float(np.dot(A[0] - m, A[0] - m))
    with np.errstate(divide="ignore", invalid="ignore"):
        t = h / (2.0 * s)
    return s, t


def _tops_pencil_walk(cloud: PointCloud, limit: int):
    """Top rhomboids with |x_in| <= limit, found by walking sphere pencils.

    Every top cell (x_in, T) lies on the pencil of each d-subset of T; on a
    pencil the inside count at each event is read off sorted event
    parameters.  Float counts only nominate candidates (with a tolerance
    band); every nominated top is classified exactly.
    """
    d, n = cloud.dim, cloud.n
    X = cloud.float_coords
    diam = float(np.max(np.ptp(X, axis=0))) or 1.0
    tol = 1e-9
    checked: dict[tuple[int, ...], tuple] = {}
    tops = {}
    queue: list[tuple[int, ...]] = []
    queued: set[tuple[int, ...]] = set()

    def visit(top):
        if top in checked:
            return
        x_in, r2 = _classify_top(cloud, top)
        checked[top] = x_in
        if len(x_in) <= limit:
            tops[(x_in, top)] = r2
            for D in itertools.combinations(top, d):
                if D not in queued:
                    queued.add(D)
                    queue.append(D)

    for top in _seed_simplices(cloud):
        visit(top)
        if tops:
            break
    if not tops:
        return _tops_brute_force(cloud, limit)

    while queue:
        D = queue.pop()
        s, t = _pencil(cloud, D)
        mask = np.ones(n, dtype=bool)
        mask[list(D)] = False
        sure = mask & (np.abs(s) > tol * diam)
        tp = np.sort(t[sure & (s > 0)])
        tm = np.sort(t[sure & (s < 0)])
        cand = np.flatnonzero(mask)
        tc = t[cand]
        finite = np.isfinite(tc)
        band = tol * (np.abs(np.where(finite, tc, 0.0)) + diam)
        lo = np.searchsorted(tp, tc - band, side="left") + (len(tm) - np.searchsorted(tm, tc + band, side="right"))
        lo = np.where(finite, lo, 0)
        for c in cand[lo <= limit]:
            visit(tuple(sorted(D + (int(c),))))
    return tops


def _seed_simplices(cloud: PointCloud):
    X = cloud.float_coords
    if cloud.dim == 1:
        order = np.argsort(X[:, 0])
        gaps = np.diff(X[order, 0])
        i = int(np.argmin(gaps))
        yield tuple(sorted((int(order[i]), int(order[i + 1]))))
        return
    from scipy.spatial import Delaunay

    try:
        tri = Delaunay(X)
    except Exception:  # qhull refuses some degenerate inputs; fall back in caller
        return
    for simplex in tri.simplices:
        yield tuple(sorted(int(i) for i in simplex))


def _close_under_faces(tops: dict[Key, Fraction], limit: int | None) -> set[Key]:
    cells: set[Key] = set()
    for (x_in, top) in tops:
        base = len(x_in)
        for labels in itertools.product((0, 1, 2), repeat=len(top)):
            n_in = labels.count(0)
            if limit is not None and base + n_in > limit:
                continue
            extra = tuple(p for p, l in zip(top, labels) if l == 0)
            on = tuple(p for p, l in zip(top, labels) if l == 1)
            cells.add((_merge(x_in, extra) if extra else x_in, on))
    return cells


def _assign_radii(cloud: PointCloud, keys: set[Key], tops: dict[Key, Fraction]):
    """Filtration radius of every cell.

    A cell's own candidate is the smallest sphere through x_on; when that
    sphere respects the cell's closed in/out constraints it is optimal,
    otherwise the optimum sits on a proper face of the feasible polyhedron,
    i.e. on a coface of the cell.  Cells are processed by decreasing
    dimension so every coface is final when it is needed.
    """
    facets: dict[Key, tuple[Key, ...]] = {}
    cofaces: dict[Key, list[Key]] = defaultdict(list)
    for key in keys:
        if key[1]:
            fs = tuple(f for f in boundary_rhomboid(key) if f in keys)
            facets[key] = fs
            for f in fs:
                cofaces[f].append(key)
        else:
            facets[key] = ()

    own: dict[tuple[int, ...], tuple[frozenset, frozenset, Fraction]] = {}

    def own_sphere(on: tuple[int, ...]):
        if on not in own:
            ss = support_sphere(cloud, on)
            sides = ss.sides(cloud)
            inside = frozenset(int(j) for j in np.flatnonzero(sides < 0))
            extra_on = frozenset(int(j) for j in np.flatnonzero(sides == 0)) - set(on)
            own[on] = (inside, extra_on, ss.radius_sq)
        return own[on]

    r: dict[Key, Fraction] = {}
    top_dim = cloud.dim + 1
    for key in sorted(keys, key=lambda k: -len(k[1])):
        x_in, x_on = key
        if len(x_on) == top_dim:
            r[key] = tops[key]
            continue
        best = None
        if len(x_on) == 1:
            if not x_in:
                best = Fraction(0)
        elif x_on:
            inside, extra_on, r2 = own_sphere(x_on)
            xs = set(x_in)
            if inside <= xs and xs <= inside | extra_on:
                best = r2
        if best is None:
            vals = [r[c] for c in cofaces.get(key, ())]
            if not vals:
                raise RuntimeError(f"cell {key} has neither a feasible sphere nor a coface")
            best = min(vals)
        r[key] = best
    return r, facets


def enumerate_rhomboids(cloud: PointCloud, max_depth: int | None = None, method: str = "auto") -> RhomboidTiling:
    """Enumerate the rhomboid tiling with exact filtration radii.

    With ``max_depth`` = K the result holds every cell with k_min <= K, which
    is what the truncated bifiltrations (unsliced and sliced) need; pass it
    through ``truncate`` for Rhomb^{<=K} itself.
    """
    d, n = cloud.dim, cloud.n
    if n < d + 1:
        raise ValueError(f"need at least dim+1 = {d + 1} sites, got {n}")
    if len(set(cloud.int_coords)) != n:
        seen = {}
        for i, p in enumerate(cloud.int_coords):
            if p in seen:
                raise GeneralPositionError(PositionReport(False, "duplicate", (seen[p], i)))
            seen[p] = i
    if method == "auto":
        method = "brute" if max_depth is None or comb(n, d + 1) <= BRUTE_FORCE_LIMIT else "pencil"
    if method == "brute":
        tops = _tops_brute_force(cloud, max_depth)
    elif method == "pencil":
        if max_depth is None:
            raise ValueError("pencil enumeration needs a depth limit")
        tops = _tops_pencil_walk(cloud, max_depth)
    else:
        raise ValueError(f"unknown method {method!r}")
    log.debug("%d top rhomboids (%s)", len(tops), method)
    keys = _close_under_faces(tops, max_depth)
    radii, facets = _assign_radii(cloud, keys, tops)
    cells = {k: Rhomboid(k[0], k[1], radii[k]) for k in keys}
    return RhomboidTiling(cloud, cells, facets, depth_limit=max_depth)


def truncate_tiling(t: RhomboidTiling, K: int) -> RhomboidTiling:
    if K < 1:
        raise ValueError("truncation depth must be at least 1")
    if t.depth_limit is not None and t.depth_limit < K:
        raise ValueError(f"tiling is only complete up to depth {t.depth_limit}")
    if t.max_depth is not None and t.max_depth <= K:
        return t
    cells = {k: c for k, c in t.cells.items() if c.k_max <= K}
    facets = {k: t.facets[k] for k in cells}
    return RhomboidTiling(t.cloud, cells, facets, depth_limit=None, max_depth=K)


# ---------------------------------------------------------------------------
# sliced tiling

@dataclass(frozen=True)
class SlicedCell:
    kind: str  # "vertex" | "slice" | "slab"
    parent: Key
    depth: int  # vertex depth, slice depth, or lower depth of a slab
    vertices: VertexSet
    r_val: Fraction
    k_val: int

    @property
    def dim(self) -> int:
        m = len(self.parent[1])
        return {"vertex": 0, "slab": m, "slice": m - 1}[self.kind]

    @property
    def top_depth(self) -> int:
        return self.depth + 1 if self.kind == "slab" else self.depth

    @property
    def key(self) -> VertexSet:
        return self.vertices


def slab_vertices(x_in, x_on, k) -> VertexSet:
    return canonical(vertices_at_depth(x_in, x_on, k) + vertices_at_depth(x_in, x_on, k + 1))


def slice_vertices(x_in, x_on, k) -> VertexSet:
    return canonical(vertices_at_depth(x_in, x_on, k))


def slice_tiling(t: RhomboidTiling, max_depth: int | None = None) -> dict[VertexSet, SlicedCell]:
    """Cut every rhomboid along the integer-depth hyperplanes.

    Emits every vertex, every slab between consecutive depths and every
    interior slice.  Slices at a rhomboid's extreme depths coincide with its
    faces and are not emitted twice.  With ``max_depth`` only cells whose
    vertices all have depth <= max_depth are kept.
    """
    if max_depth is None:
        max_depth = t.depth_limit if t.max_depth is None else t.max_depth
    out: dict[VertexSet, SlicedCell] = {}

    def add(cell: SlicedCell):
        if max_depth is not None and cell.top_depth > max_depth:
            return
        if cell.key in out:
            raise RuntimeError(f"two sliced cells share the vertex set {cell.key}")
        out[cell.key] = cell

    for rho in t.cells.values():
        x_in, x_on = rho.key
        lo, hi = rho.k_min, rho.k_max
        if not x_on:
            add(SlicedCell("vertex", rho.key, lo, (x_in,), rho.r_val, lo))
            continue
        for k in range(lo, hi):
            if max_depth is not None and k + 1 > max_depth:
                break
            add(SlicedCell("slab", rho.key, k, slab_vertices(x_in, x_on, k), rho.r_val, k))
        for k in range(lo + 1, hi):
            if max_depth is not None and k > max_depth:
                break
            add(SlicedCell("slice", rho.key, k, slice_vertices(x_in, x_on, k), rho.r_val, k))
    return out


def boundary_sliced(c: SlicedCell) -> list[VertexSet]:
    """Facets of a sliced cell, as vertex-set keys (deduplicated)."""
    x_in, x_on = c.parent
    lo, hi = len(x_in), len(x_in) + len(x_on)
    k = c.depth
    if c.dim == 0:
        raise ValueError("a vertex has no boundary")
    res: list[VertexSet] = []
    if c.kind == "slab":
        if len(x_on) == 1:
            return [(x_in,), (_merge(x_in, x_on),)]
        for p in x_on:
            rest = tuple(q for q in x_on if q != p)
            inner = _merge(x_in, (p,))
            # x_p = 1 face spans [lo+1, hi]; x_p = 0 face spans [lo, hi-1]
            for s_in, s_lo, s_hi in ((inner, lo + 1, hi), (x_in, lo, hi - 1)):
                if s_lo <= k and k + 1 <= s_hi:
                    res.append(slab_vertices(s_in, rest, k))
        if k > lo:
            res.append(slice_vertices(x_in, x_on, k))
        if k + 1 < hi:
            res.append(slice_vertices(x_in, x_on, k + 1))
    else:
        for p in x_on:
            rest = tuple(q for q in x_on if q != p)
            inner = _merge(x_in, (p,))
            for s_in, s_lo, s_hi in ((inner, lo + 1, hi), (x_in, lo, hi - 1)):
                if s_lo < k < s_hi:
                    res.append(slice_vertices(s_in, rest, k))
                elif (k == s_lo or k == s_hi) and c.dim == 1:
                    res.append(slice_vertices(s_in, rest, k))
    return list(dict.fromkeys(res))


def truncate_sliced(cells: dict[VertexSet, SlicedCell], K: int) -> dict[VertexSet, SlicedCell]:
    if K < 1:
        raise ValueError("truncation depth must be at least 1")
    return {key: c for key, c in cells.items() if c.top_depth <= K}


def mosaic(cells: dict[VertexSet, SlicedCell], k: int, r2: Fraction | None = None) -> list[SlicedCell]:
    """Cells of the depth-k hyperplane with radius at most r (r2 = r^2; None = infinity)."""
    if k < 1:
        raise ValueError("mosaic depth must be at least 1")
    return [
        c for c in cells.values()
        if c.kind in ("vertex", "slice") and c.depth == k and (r2 is None or c.r_val <= r2)
    ]


# ---------------------------------------------------------------------------

@dataclass
class TilingStats:
    n: int
    dim: int
    total: int
    per_dim: dict[int, int]
    per_kmin: dict[int, int]
    top_cells: int
    max_depth: int
    voronoi_vertices: dict[int, int] = field(default_factory=dict)  # V_k

    @property
    def bound(self) -> int:
        return 2 * (self.n + 1) ** (self.dim + 1)


def tiling_stats(t: RhomboidTiling) -> TilingStats:
    per_dim = Counter(c.dim_cell for c in t.cells.values())
    per_kmin = Counter(c.k_min for c in t.cells.values())
    tops = t.tops()
    V = Counter()
    for c in tops:
        for k in range(c.k_min + 1, c.k_max):
            V[k] += 1
    if t.depth_limit is not None:
        V = Counter({k: v for k, v in V.items() if k <= t.depth_limit + 1})
    return TilingStats(
        n=t.cloud.n,
        dim=t.cloud.dim,
        total=len(t.cells),
        per_dim=dict(sorted(per_dim.items())),
        per_kmin=dict(sorted(per_kmin.items())),
        top_cells=len(tops),
        max_depth=max((c.k_max for c in t.cells.values()), default=0),
        voronoi_vertices=dict(sorted(V.items())),
    )
