"""Exact low-dimensional geometry: point clouds, spheres and sphere predicates.

All decisions are made in exact rational arithmetic.  Bulk classification of
every site against one sphere goes through a float filter first; any value
whose sign the filter cannot certify is recomputed with Python integers.
"""
from __future__ import annotations

import enum
import itertools
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property, reduce
from math import comb, gcd
from typing import Iterable, Sequence

import numpy as np

Point = tuple[Fraction, ...]

# relative slack of the float filter; the true rounding error is ~1e-15
_FILTER_EPS = 1e-12


class Side(enum.IntEnum):
    INSIDE = -1
    ON = 0
    OUTSIDE = 1


class DegenerateInputError(ValueError):
    """Raised when a construction needs affinely independent points and gets none."""


class GeneralPositionError(ValueError):
    def __init__(self, report: "PositionReport"):
        super().__init__(report.describe())
        self.report = report


def to_fraction(x) -> Fraction:
    if isinstance(x, Fraction):
        return x
    if isinstance(x, float):
        # shortest round-tripping decimal, not the binary expansion
        return Fraction(repr(x))
    return Fraction(x)


@dataclass(frozen=True)
class PointCloud:
    dim: int
    sites: tuple[Point, ...]

    def __post_init__(self):
        if self.dim not in (1, 2, 3):
            raise ValueError(f"dimension must be 1, 2 or 3, got {self.dim}")
        for i, p in enumerate(self.sites):
            if len(p) != self.dim:
                raise ValueError(f"site {i} has {len(p)} coordinates, expected {self.dim}")

    @classmethod
    def from_points(cls, points: Iterable[Sequence], dim: int | None = None) -> "PointCloud":
        pts = []
        for p in points:
            if isinstance(p, (int, float, str, Fraction)):
                p = (p,)
            pts.append(tuple(to_fraction(x) for x in p))
        if dim is None:
            if not pts:
                raise ValueError("cannot infer dimension of an empty cloud")
            dim = len(pts[0])
        return cls(dim, tuple(pts))

    @property
    def n(self) -> int:
        return len(self.sites)

    @cached_property
    def scale(self) -> int:
        """Common denominator L of all coordinates; L * site is an integer vector."""
        dens = [x.denominator for p in self.sites for x in p]
        return reduce(lambda a, b: a * b // gcd(a, b), dens, 1)

    @cached_property
    def int_coords(self) -> tuple[tuple[int, ...], ...]:
        L = self.scale
        return tuple(tuple(int(x * L) for x in p) for p in self.sites)

    @cached_property
    def _float_scaled(self) -> np.ndarray:
        return np.array(self.int_coords, dtype=float).reshape(self.n, self.dim)

    @cached_property
    def _float_sq(self) -> np.ndarray:
        return np.einsum("ij,ij->i", self._float_scaled, self._float_scaled)

    @cached_property
    def int_sq(self) -> tuple[int, ...]:
        return tuple(sum(c * c for c in p) for p in self.int_coords)

    @cached_property
    def float_coords(self) -> np.ndarray:
        return np.array([[float(x) for x in p] for p in self.sites]).reshape(self.n, self.dim)


@dataclass(frozen=True)
class Sphere:
    center: Point
    radius_sq: Fraction

    def __post_init__(self):
        if self.radius_sq < 0:
            raise ValueError("negative squared radius")

    @property
    def radius(self) -> float:
        return float(self.radius_sq) ** 0.5

    @property
    def dim(self) -> int:
        return len(self.center)


@dataclass(frozen=True)
class SpherePartition:
    x_in: frozenset[int]
    x_on: frozenset[int]
    x_out: frozenset[int]

    def __post_init__(self):
        if self.x_in & self.x_on or self.x_in & self.x_out or self.x_on & self.x_out:
            raise ValueError("partition blocks overlap")


def _sq(v) -> Fraction:
    return sum((x * x for x in v), Fraction(0))


def side_of_sphere(s: Sphere, p: Sequence) -> Side:
    if len(p) != s.dim:
        raise ValueError(f"point of dimension {len(p)} tested against sphere in dimension {s.dim}")
    d2 = _sq(to_fraction(x) - c for x, c in zip(p, s.center))
    if d2 < s.radius_sq:
        return Side.INSIDE
    if d2 > s.radius_sq:
        return Side.OUTSIDE
    return Side.ON


def _solve(a: list[list], b: list):
    """Gaussian elimination over the rationals; None if singular."""
    m = len(a)
    rows = [[Fraction(x) for x in row] + [Fraction(y)] for row, y in zip(a, b)]
    for col in range(m):
        piv = next((r for r in range(col, m) if rows[r][col] != 0), None)
        if piv is None:
            return None
        rows[col], rows[piv] = rows[piv], rows[col]
        pv = rows[col][col]
        for r in range(m):
            if r != col and rows[r][col] != 0:
                f = rows[r][col] / pv
                rows[r] = [x - f * y for x, y in zip(rows[r], rows[col])]
    return [rows[i][m] / rows[i][i] for i in range(m)]


def circumsphere(points: Sequence[Sequence]) -> Sphere:
    """Smallest sphere through all given points (centre in their affine hull)."""
    pts = [tuple(to_fraction(x) for x in p) for p in points]
    if not pts:
        raise ValueError("circumsphere of an empty set")
    dim = len(pts[0])
    if len(pts) > dim + 1:
        raise DegenerateInputError(f"{len(pts)} points are affinely dependent in dimension {dim}")
    a0 = pts[0]
    vs = [tuple(x - y for x, y in zip(p, a0)) for p in pts[1:]]
    gram = [[sum(x * y for x, y in zip(u, v)) for v in vs] for u in vs]
    rhs = [_sq(v) / 2 for v in vs]
    lam = _solve(gram, rhs)
    if lam is None:
        raise DegenerateInputError("points are affinely dependent")
    center = tuple(a0[i] + sum((l * v[i] for l, v in zip(lam, vs)), Fraction(0)) for i in range(dim))
    return Sphere(center, _sq(x - c for x, c in zip(a0, center)))


def _feasible(s: Sphere, inside: Sequence, outside: Sequence) -> bool:
    return all(side_of_sphere(s, p) != Side.OUTSIDE for p in inside) and all(
        side_of_sphere(s, p) != Side.INSIDE for p in outside
    )


def min_sphere_constrained(x_on: Sequence, x_in: Sequence, x_out: Sequence) -> Sphere | None:
    """Minimum-radius sphere with x_on on it, x_in inside-or-on and x_out outside-or-on.

    Enumerates every support set B with x_on <= B and |B| <= dim + 1.  The
    optimum of the convex radius function over the polyhedron of feasible
    centres is attained where some constraint set is tight, so the smallest
    feasible candidate is the exact minimum.  Returns None when infeasible.
    """
    on = [tuple(to_fraction(x) for x in p) for p in x_on]
    ins = [tuple(to_fraction(x) for x in p) for p in x_in]
    outs = [tuple(to_fraction(x) for x in p) for p in x_out]
    allp = on + ins + outs
    if not allp:
        return None
    dim = len(allp[0])
    if any(len(p) != dim for p in allp):
        raise ValueError("points of mixed dimension")
    if len(on) > dim + 1:
        return None
    rest = ins + outs
    best = None
    for extra in range(0, dim + 2 - len(on)):
        for chosen in itertools.combinations(rest, extra):
            support = on + list(chosen)
            if not support:
                continue
            try:
                s = circumsphere(support)
            except DegenerateInputError:
                continue
            if any(side_of_sphere(s, p) != Side.ON for p in on):
                continue
            if best is not None and s.radius_sq >= best.radius_sq:
                continue
            if _feasible(s, ins, outs):
                best = s
    return best


def miniball(points: Sequence[Sequence]) -> Sphere:
    """Minimum enclosing sphere by Welzl's move-to-front recursion, exact."""
    pts = [tuple(to_fraction(x) for x in p) for p in points]
    if not pts:
        raise ValueError("miniball of an empty set")
    dim = len(pts[0])

    def ball(boundary):
        if not boundary:
            return None
        return circumsphere(boundary)

    def welzl(m: int, boundary: list):
        s = ball(boundary)
        if len(boundary) == dim + 1:
            return s
        for i in range(m):
            p = pts[i]
            if s is None or side_of_sphere(s, p) == Side.OUTSIDE:
                s = welzl(i, boundary + [p])
                # move to front keeps the expected running time linear
                pts.insert(0, pts.pop(i))
        return s

    try:
        return welzl(len(pts), [])
    except DegenerateInputError:
        return min_sphere_constrained([], pts, [])


# ---------------------------------------------------------------------------
# Integer kernel used by the tiling code: spheres through subsets of a cloud.

def _det(m: list[list[int]]) -> int:
    """Bareiss fraction-free determinant of a small integer matrix."""
    n = len(m)
    if n == 0:
        return 1
    a = [row[:] for row in m]
    sign, prev = 1, 1
    for k in range(n - 1):
        if a[k][k] == 0:
            swap = next((r for r in range(k + 1, n) if a[r][k] != 0), None)
            if swap is None:
                return 0
            a[k], a[swap] = a[swap], a[k]
            sign = -sign
        for i in range(k + 1, n):
            for j in range(k + 1, n):
                a[i][j] = (a[i][j] * a[k][k] - a[i][k] * a[k][j]) // prev
        prev = a[k][k]
    return sign * a[n - 1][n - 1]


@dataclass(frozen=True)
class SupportSphere:
    """Smallest sphere through sites `support` of a cloud, in scaled integer form.

    With integer site coordinates P (site * L), the centre is C / q and the
    sign of  q|P|^2 - 2 P.C - W  is the side of the sphere P lies on.
    """
    support: tuple[int, ...]
    q: int
    C: tuple[int, ...]
    W: int
    radius_sq: Fraction  # in original (unscaled) units

    def center(self, cloud: PointCloud) -> Point:
        den = self.q * cloud.scale
        return tuple(Fraction(c, den) for c in self.C)

    def value(self, cloud: PointCloud, i: int) -> int:
        P = cloud.int_coords[i]
        return self.q * cloud.int_sq[i] - 2 * sum(p * c for p, c in zip(P, self.C)) - self.W

    def sides(self, cloud: PointCloud) -> np.ndarray:
        """Side of every site: -1 inside, 0 on, +1 outside (exactly certified)."""
        qf, Wf = float(self.q), float(self.W)
        Cf = np.array([float(c) for c in self.C])
        X = cloud._float_scaled
        out = np.empty(cloud.n, dtype=np.int8)
        unsure = np.ones(cloud.n, dtype=bool)
        if np.isfinite(qf) and np.isfinite(Wf) and np.all(np.isfinite(Cf)):
            with np.errstate(over="ignore", invalid="ignore"):
                t1 = qf * cloud._float_sq
                t2 = 2.0 * (X @ Cf)
                val = t1 - t2 - Wf
                bound = _FILTER_EPS * (np.abs(t1) + 2.0 * (np.abs(X) @ np.abs(Cf)) + abs(Wf))
                sure = np.isfinite(val) & np.isfinite(bound) & (np.abs(val) > bound)
            out[sure] = np.sign(val[sure]).astype(np.int8)
            unsure = ~sure
        for i in np.flatnonzero(unsure):
            v = self.value(cloud, int(i))
            out[i] = (v > 0) - (v < 0)
        return out


def support_sphere(cloud: PointCloud, support: Sequence[int]) -> SupportSphere:
    support = tuple(support)
    pts = [cloud.int_coords[i] for i in support]
    a0 = pts[0]
    vs = [tuple(x - y for x, y in zip(p, a0)) for p in pts[1:]]
    m = len(vs)
    gram = [[sum(x * y for x, y in zip(u, v)) for v in vs] for u in vs]
    rhs = [sum(x * x for x in v) for v in vs]
    g = _det(gram)
    if g == 0:
        raise DegenerateInputError(f"sites {support} are affinely dependent")
    lam = []
    for j in range(m):
        mj = [row[:j] + [rhs[r]] + row[j + 1:] for r, row in enumerate(gram)]
        lam.append(_det(mj))
    # centre = a0 + sum (lam_j / 2g) v_j
    q = 2 * g
    if q < 0:
        q, lam = -q, [-x for x in lam]
    C = tuple(q * a0[i] + sum(l * v[i] for l, v in zip(lam, vs)) for i in range(cloud.dim))
    W = q * sum(x * x for x in a0) - 2 * sum(x * c for x, c in zip(a0, C))
    r2_scaled = Fraction(sum((q * x - c) ** 2 for x, c in zip(a0, C)), q * q)
    return SupportSphere(support, q, C, W, r2_scaled / (cloud.scale ** 2))


def sphere_of(cloud: PointCloud, ss: SupportSphere) -> Sphere:
    return Sphere(ss.center(cloud), ss.radius_sq)


# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class PositionReport:
    ok: bool
    kind: str = ""  # "duplicate", "affine", "cospherical", "too-few"
    subset: tuple[int, ...] = ()
    exhaustive: bool = True

    def describe(self) -> str:
        if self.ok:
            return "general position certified" if self.exhaustive else "no degeneracy encountered"
        return f"general position violated ({self.kind}): sites {list(self.subset)}"


def _affinely_independent(cloud: PointCloud, idx: Sequence[int]) -> bool:
    pts = [cloud.int_coords[i] for i in idx]
    vs = [[x - y for x, y in zip(p, pts[0])] for p in pts[1:]]
    gram = [[sum(x * y for x, y in zip(u, v)) for v in vs] for u in vs]
    return _det(gram) != 0


def check_general_position(cloud: PointCloud, max_subsets: int | None = None) -> PositionReport:
    """Exact check that no dim+1 sites are affinely dependent and no dim+2 are cospherical.

    Violations are returned, not raised.  `max_subsets` caps the number of
    (dim+1)-subsets examined; beyond it only duplicates are checked and the
    report is marked non-exhaustive.
    """
    d, n = cloud.dim, cloud.n
    seen = {}
    for i, p in enumerate(cloud.int_coords):
        if p in seen:
            return PositionReport(False, "duplicate", (seen[p], i))
        seen[p] = i
    if n < d + 1:
        return PositionReport(False, "too-few", tuple(range(n)))
    if max_subsets is not None and comb(n, d + 1) > max_subsets:
        return PositionReport(True, exhaustive=False)
    for sub in itertools.combinations(range(n), d + 1):
        if not _affinely_independent(cloud, sub):
            for k in range(2, d + 1):
                for smaller in itertools.combinations(sub, k):
                    if not _affinely_independent(cloud, smaller):
                        return PositionReport(False, "affine", smaller)
            return PositionReport(False, "affine", sub)
    if d + 2 <= n:
        for sub in itertools.combinations(range(n), d + 1):
            sides = support_sphere(cloud, sub).sides(cloud)
            on = [int(j) for j in np.flatnonzero(sides == 0) if j not in sub]
            if on:
                return PositionReport(False, "cospherical", tuple(sorted(sub + (on[0],))))
    return PositionReport(True)
