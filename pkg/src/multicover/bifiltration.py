"""Bigraded GF(2) chain complexes for the Rhomb, S-Rhomb and S-Del bifiltrations.

A cell is alive at grade (r, k) when one of its minimal grades (r', k')
satisfies r' <= r and k' >= k: the bifiltration grows with r and shrinks
with k.  Radii are squared and exact.
"""
from __future__ import annotations

import itertools
import re
from dataclasses import dataclass, field
from decimal import Decimal, localcontext
from fractions import Fraction
from math import isqrt
from typing import NamedTuple

from .homology import rank_bits
from .tiling import (
    RhomboidTiling,
    SlicedCell,
    VertexSet,
    boundary_sliced,
    canonical,
    slice_tiling,
    truncate_sliced,
    truncate_tiling,
    vertex_order,
)

MODELS = ("rhomb", "srhomb", "sdel", "cech-oracle")


class Bigrade(NamedTuple):
    r2: Fraction  # squared radius (or a snapped grid value)
    k: int

    def leq(self, other: "Bigrade") -> bool:
        return self.r2 <= other.r2 and self.k >= other.k


def minimal_grades(grades) -> tuple[Bigrade, ...]:
    gs = set(grades)
    keep = [g for g in gs if not any(h != g and h.leq(g) for h in gs)]
    return tuple(sorted(keep, key=lambda g: (-g.k, g.r2)))


@dataclass
class BigradedComplex:
    model: str
    dims: list[int] = field(default_factory=list)
    boundaries: list[tuple[int, ...]] = field(default_factory=list)
    grades: list[tuple[Bigrade, ...]] = field(default_factory=list)
    keys: list[VertexSet] = field(default_factory=list)
    depth_max: list[int] = field(default_factory=list)
    r_grid: list[Fraction] | None = None  # set once grades are snapped

    def __len__(self):
        return len(self.dims)

    @property
    def top_dim(self) -> int:
        return max(self.dims, default=-1)

    def f_vector(self, grade: Bigrade | None = None) -> list[int]:
        from .homology import alive_cells

        ids = range(len(self)) if grade is None else alive_cells(self, grade)
        f = [0] * (self.top_dim + 1)
        for j in ids:
            f[self.dims[j]] += 1
        return f

    def is_one_critical(self) -> bool:
        return all(len(g) == 1 for g in self.grades)

    def check_boundary_closure(self) -> bool:
        for j, bd in enumerate(self.boundaries):
            for f in bd:
                if f >= j:
                    return False
                if not all(any(h.leq(g) for h in self.grades[f]) for g in self.grades[j]):
                    return False
        return True

    def check_dd_zero(self) -> bool:
        for bd in self.boundaries:
            acc = 0
            for f in bd:
                for g in self.boundaries[f]:
                    acc ^= 1 << g
            if acc:
                return False
        return True


def _assemble(model: str, items) -> BigradedComplex:
    """items: (key, dim, boundary keys, grades, depth_max); ids follow (dim, key)."""
    items = sorted(items, key=lambda it: (it[1], it[0]))
    index = {it[0]: j for j, it in enumerate(items)}
    c = BigradedComplex(model)
    for key, dim, bkeys, grades, dmax in items:
        try:
            bd = tuple(sorted(index[b] for b in bkeys))
        except KeyError as e:
            raise ValueError(f"{model}: boundary cell {e.args[0]} of {key} is missing") from None
        c.dims.append(dim)
        c.boundaries.append(bd)
        c.grades.append(tuple(grades))
        c.keys.append(key)
        c.depth_max.append(dmax)
    return c


def build_rhomb(t: RhomboidTiling, max_depth: int | None = None) -> BigradedComplex:
    """One cell per rhomboid, graded (r_val, k_min)."""
    if max_depth is None and t.max_depth is None:
        max_depth = t.depth_limit
    if max_depth is not None:
        t = truncate_tiling(t, max_depth)
    keymap = {k: rho.vertex_set() for k, rho in t.cells.items()}
    items = []
    for k, rho in t.cells.items():
        bd = [keymap[f] for f in t.facets[k]] if rho.x_on else []
        items.append((keymap[k], rho.dim_cell, bd, (Bigrade(rho.r_val, rho.k_min),), rho.k_max))
    return _assemble("rhomb", items)


def build_srhomb(cells: dict[VertexSet, SlicedCell]) -> BigradedComplex:
    items = []
    for key, c in cells.items():
        bd = boundary_sliced(c) if c.dim else []
        items.append((key, c.dim, bd, (Bigrade(c.r_val, c.k_val),), c.top_depth))
    return _assemble("srhomb", items)


def sdel_grades(cells: dict[VertexSet, SlicedCell]) -> dict[VertexSet, tuple[Bigrade, ...]]:
    """Minimal grades of every simplex spanned inside a sliced cell.

    r_k(s) = min r_val over sliced cells containing s with k_val >= k; the
    minimal corners are the k where r_k drops below r_{k+1}.
    """
    best: dict[VertexSet, dict[int, Fraction]] = {}
    for c in cells.values():
        verts = c.vertices
        for size in range(1, len(verts) + 1):
            for sub in itertools.combinations(verts, size):
                per_k = best.setdefault(sub, {})
                old = per_k.get(c.k_val)
                if old is None or c.r_val < old:
                    per_k[c.k_val] = c.r_val
    out = {}
    for s, per_k in best.items():
        corners = []
        running = None
        for k in sorted(per_k, reverse=True):
            r = per_k[k]
            if running is None or r < running:
                corners.append(Bigrade(r, k))
                running = r
        out[s] = tuple(corners)
    return out


def build_sdel(cells: dict[VertexSet, SlicedCell]) -> BigradedComplex:
    """Simplicial model: all nonempty subsets of sliced-cell vertex sets."""
    grades = sdel_grades(cells)
    items = []
    for s, gs in grades.items():
        dim = len(s) - 1
        bd = [s[:i] + s[i + 1:] for i in range(len(s))] if dim else []
        items.append((s, dim, bd, gs, max(len(v) for v in s)))
    return _assemble("sdel", items)


def truncate(c, K: int):
    """Drop every cell with a vertex deeper than K (complex, tiling or sliced cells)."""
    if K < 1:
        raise ValueError("truncation depth must be at least 1")
    if isinstance(c, RhomboidTiling):
        return truncate_tiling(c, K)
    if isinstance(c, dict):
        return truncate_sliced(c, K)
    keep = [j for j in range(len(c)) if c.depth_max[j] <= K]
    new_id = {j: i for i, j in enumerate(keep)}
    out = BigradedComplex(c.model, r_grid=c.r_grid)
    for j in keep:
        out.dims.append(c.dims[j])
        out.boundaries.append(tuple(new_id[f] for f in c.boundaries[j]))
        out.grades.append(c.grades[j])
        out.keys.append(c.keys[j])
        out.depth_max.append(c.depth_max[j])
    return out


def _ceil_index(r2: Fraction, top: Fraction, steps: int) -> int:
    """Smallest j with (j * R / steps)^2 >= r2, where R^2 = top."""
    if top == 0:
        return 0
    x = r2 * steps * steps / top
    j = isqrt(x.numerator // x.denominator)
    while j * j < x:
        j += 1
    return j


def snap_grades(c: BigradedComplex, N: int = 100) -> BigradedComplex:
    """Round radii up onto N evenly spaced radius values from 0 to the largest radius."""
    if N < 2:
        raise ValueError("need at least two grid points")
    top = max((g.r2 for gs in c.grades for g in gs), default=Fraction(0))
    steps = N - 1
    grid = [Fraction(j * j) * top / (steps * steps) for j in range(N)]
    out = BigradedComplex(c.model, list(c.dims), list(c.boundaries), [], list(c.keys), list(c.depth_max), grid)
    for gs in c.grades:
        snapped = [Bigrade(grid[_ceil_index(g.r2, top, steps)], g.k) for g in gs]
        out.grades.append(minimal_grades(snapped))
    return out


def grid_index(c: BigradedComplex, r2: Fraction) -> int:
    return c.r_grid.index(r2)


# ---------------------------------------------------------------------------
# FIREP

SIG_DIGITS = 17


def radius_decimal(r2: Fraction) -> Decimal:
    """sqrt(r2) correctly rounded to 17 significant digits."""
    with localcontext() as ctx:
        ctx.prec = SIG_DIGITS
        return (Decimal(r2.numerator) / Decimal(r2.denominator)).sqrt() if r2 else Decimal(0)


def format_decimal(x: Decimal) -> str:
    return format(x, "f")


@dataclass
class FirepDocument:
    hom_degree: int
    x_label: str
    y_label: str
    high: list[tuple[Decimal, int, tuple[int, ...]]]  # degree i+1: x, y, boundary into mid
    mid: list[tuple[Decimal, int, tuple[int, ...]]]  # degree i: x, y, boundary into low
    low: list[tuple[Decimal, int] | None]  # degree i-1 grades (None when parsed)
    k_max: int
    snapped: bool = False
    r_grid: list[Fraction] | None = None

    @property
    def counts(self) -> tuple[int, int, int]:
        return len(self.high), len(self.mid), len(self.low)

    @property
    def size(self) -> int:
        return sum(self.counts)


def assemble_firep(c: BigradedComplex, i: int, k_max: int | None = None, min_k: int = 1) -> FirepDocument:
    """Three-term free chain complex C_{i+1} -> C_i -> C_{i-1} with grades.

    Cells born only at k < min_k (those containing the empty vertex) are
    dropped.  The y coordinate is k_max - k so both axes grow along the
    bifiltration.
    """
    if c.model == "sdel" or not c.is_one_critical():
        raise ValueError(f"FIREP export needs a 1-critical model, got {c.model}")
    if i < 0 or i > c.top_dim - 1:
        raise ValueError(f"homology degree {i} out of range for a complex of dimension {c.top_dim}")
    cells = [j for j in range(len(c)) if c.grades[j][0].k >= min_k]
    if k_max is None:
        k_max = max((c.grades[j][0].k for j in cells), default=0)
    by_deg = {deg: [j for j in cells if c.dims[j] == deg] for deg in (i - 1, i, i + 1)}
    pos = {deg: {j: p for p, j in enumerate(ids)} for deg, ids in by_deg.items()}

    def x_of(g: Bigrade) -> Decimal:
        if c.r_grid is not None:
            return Decimal(c.r_grid.index(g.r2))
        return radius_decimal(g.r2)

    def gens(deg):
        out = []
        for j in by_deg[deg]:
            g = c.grades[j][0]
            bd = tuple(sorted(pos[deg - 1][f] for f in c.boundaries[j])) if deg > 0 else ()
            out.append((x_of(g), k_max - g.k, bd))
        return out

    low = [(x_of(c.grades[j][0]), k_max - c.grades[j][0].k) for j in by_deg[i - 1]]
    return FirepDocument(
        hom_degree=i,
        x_label="radius index" if c.r_grid is not None else "radius",
        y_label=f"k_max - k (k_max={k_max})",
        high=gens(i + 1),
        mid=gens(i),
        low=low,
        k_max=k_max,
        snapped=c.r_grid is not None,
        r_grid=c.r_grid,
    )


def write_firep(doc: FirepDocument) -> str:
    lines = ["firep", doc.x_label, doc.y_label, " ".join(map(str, doc.counts))]
    for x, y, bd in doc.high + doc.mid:
        lines.append(f"{format_decimal(x)} {y} ; {' '.join(map(str, bd))}".rstrip())
    return "\n".join(lines) + "\n"


class FirepParseError(ValueError):
    pass


def parse_firep(text: str) -> FirepDocument:
    lines = [ln.strip() for ln in text.splitlines()]
    lines = [ln for ln in lines if ln and not ln.startswith("#")]
    if len(lines) < 4 or lines[0] != "firep":
        raise FirepParseError("missing 'firep' header")
    x_label, y_label = lines[1], lines[2]
    try:
        g2, g1, g0 = (int(x) for x in lines[3].split())
    except ValueError:
        raise FirepParseError(f"bad generator counts line: {lines[3]!r}") from None
    body = lines[4:]
    if len(body) != g2 + g1:
        raise FirepParseError(f"expected {g2 + g1} generator lines, found {len(body)}")
    gens = []
    for ln_no, ln in enumerate(body, start=5):
        head, sep, tail = ln.partition(";")
        parts = head.split()
        if not sep or len(parts) != 2:
            raise FirepParseError(f"line {ln_no}: expected '<x> <y> ; <indices>'")
        bd = tuple(int(v) for v in tail.split())
        gens.append((Decimal(parts[0]), int(parts[1]), bd))
    m = re.search(r"k_max=(\d+)", y_label)
    k_max = int(m.group(1)) if m else 0
    high, mid = gens[:g2], gens[g2:]
    for x, y, bd in high:
        if any(b >= g1 for b in bd):
            raise FirepParseError("boundary index out of range")
    for x, y, bd in mid:
        if any(b >= g0 for b in bd):
            raise FirepParseError("boundary index out of range")
    deg = 0
    return FirepDocument(deg, x_label, y_label, high, mid, [None] * g0, k_max, snapped="index" in x_label)


def firep_eval_xy(doc: FirepDocument, x: Decimal, y: int) -> int:
    """Rank of homology at FIREP coordinates (x, y)."""
    def live(gens):
        return [bd for gx, gy, bd in gens if gx <= x and gy <= y]

    mid = live(doc.mid)
    high = live(doc.high)
    rank_i = rank_bits(sum(1 << b for b in bd) for bd in mid)
    rank_ip1 = rank_bits(sum(1 << b for b in bd) for bd in high)
    return len(mid) - rank_i - rank_ip1


def firep_eval(doc: FirepDocument, grade: Bigrade) -> int:
    if doc.snapped:
        if doc.r_grid is None:
            raise ValueError("snapped document without its radius grid; use firep_eval_xy")
        x = Decimal(sum(1 for g in doc.r_grid if g <= grade.r2) - 1)
        if x < 0:
            return 0
    else:
        x = radius_decimal(Fraction(grade.r2))
    return firep_eval_xy(doc, x, doc.k_max - grade.k)
