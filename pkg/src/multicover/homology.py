"""GF(2) matrix reduction, grade-wise Betti numbers, fixed-k barcodes, Hilbert grids.

Columns are handled internally as Python integers used as bitsets; bit j set
means row j is present.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import TYPE_CHECKING, Iterable, Sequence

import numpy as np

if TYPE_CHECKING:
    from .bifiltration import Bigrade, BigradedComplex

INF = math.inf


@dataclass
class Gf2Matrix:
    columns: list[list[int]]
    n_rows: int | None = None

    def __post_init__(self):
        for col in self.columns:
            if any(a >= b for a, b in zip(col, col[1:])):
                raise ValueError("row indices must be strictly increasing within a column")

    @classmethod
    def from_bits(cls, cols: Iterable[int], n_rows=None) -> "Gf2Matrix":
        return cls([bits_to_rows(c) for c in cols], n_rows)

    def bits(self) -> list[int]:
        return [rows_to_bits(c) for c in self.columns]


def rows_to_bits(rows: Iterable[int]) -> int:
    b = 0
    for r in rows:
        b ^= 1 << r
    return b


def bits_to_rows(b: int) -> list[int]:
    out = []
    while b:
        low = b & -b
        out.append(low.bit_length() - 1)
        b ^= low
    return out


def reduce(m: Gf2Matrix) -> tuple[Gf2Matrix, dict[int, int]]:
    """Standard left-to-right column reduction.

    Returns the reduced matrix and the pivot map lowest-row -> column.
    """
    cols = m.bits()
    pivots: dict[int, int] = {}
    for j, col in enumerate(cols):
        while col:
            low = col.bit_length() - 1
            other = pivots.get(low)
            if other is None:
                pivots[low] = j
                break
            col ^= cols[other]
        cols[j] = col
    return Gf2Matrix.from_bits(cols, m.n_rows), pivots


def rank_bits(cols: Iterable[int]) -> int:
    basis: dict[int, int] = {}
    for col in cols:
        while col:
            low = col.bit_length() - 1
            b = basis.get(low)
            if b is None:
                basis[low] = col
                break
            col ^= b
    return len(basis)


# ---------------------------------------------------------------------------

def alive_at(grades, r2, k) -> bool:
    return any(g.r2 <= r2 and g.k >= k for g in grades)


def alive_cells(c: "BigradedComplex", grade: "Bigrade") -> list[int]:
    return [j for j, gs in enumerate(c.grades) if alive_at(gs, grade.r2, grade.k)]


def _boundary_rank(c: "BigradedComplex", alive: set[int], dim: int) -> int:
    if dim <= 0:
        return 0
    rows = {}
    cols = []
    for j in sorted(alive):
        if c.dims[j] != dim:
            continue
        b = 0
        for f in c.boundaries[j]:
            pos = rows.get(f)
            if pos is None:
                pos = rows[f] = len(rows)
            b ^= 1 << pos
        cols.append(b)
    return rank_bits(cols)


def betti_at_grade(c: "BigradedComplex", grade: "Bigrade", i: int) -> int:
    """dim H_i of the subcomplex alive at `grade`, over GF(2)."""
    if i < 0:
        raise ValueError("homology degree must be nonnegative")
    alive = set(alive_cells(c, grade))
    n_i = sum(1 for j in alive if c.dims[j] == i)
    return n_i - _boundary_rank(c, alive, i) - _boundary_rank(c, alive, i + 1)


def euler_at_grade(c: "BigradedComplex", grade: "Bigrade") -> int:
    return sum((-1) ** c.dims[j] for j in alive_cells(c, grade))


# ---------------------------------------------------------------------------

@dataclass
class Barcode:
    bars: dict[int, list[tuple[Fraction, float | Fraction]]] = field(default_factory=dict)

    def __getitem__(self, i: int) -> list:
        return self.bars.get(i, [])

    def multiset(self, i: int) -> list:
        return sorted(self[i], key=lambda b: (b[0], b[1]))

    def betti(self, i: int, r2) -> int:
        return sum(1 for b, d in self[i] if b <= r2 < d)


def layer_filtration(c: "BigradedComplex", k: int, max_dim: int | None = None):
    """Cells alive at depth parameter k, ordered by (radius, dim, vertex-set key)."""
    entries = []
    for j, gs in enumerate(c.grades):
        if max_dim is not None and c.dims[j] > max_dim:
            continue
        rs = [g.r2 for g in gs if g.k >= k]
        if rs:
            entries.append((min(rs), c.dims[j], c.keys[j], j))
    entries.sort()
    return entries


def persistence_fixed_k(c: "BigradedComplex", k: int, max_dim: int) -> Barcode:
    """1-parameter persistence in the radius direction at fixed k, dims <= max_dim.

    Positive-length bars only; essential classes die at infinity.  Reduction
    runs from the top dimension down, clearing columns of cells already
    known to be positive.
    """
    entries = layer_filtration(c, k, max_dim + 1)
    order = {e[3]: pos for pos, e in enumerate(entries)}
    radius = [e[0] for e in entries]
    dims = [e[1] for e in entries]
    by_dim: dict[int, list[int]] = {}
    for pos, dm in enumerate(dims):
        by_dim.setdefault(dm, []).append(pos)

    paired: dict[int, int] = {}  # birth position -> death position
    killed: set[int] = set()
    negative: set[int] = set()
    for dm in range(max_dim + 1, 0, -1):
        pivots: dict[int, int] = {}
        for pos in by_dim.get(dm, []):
            if pos in killed:
                continue
            j = entries[pos][3]
            col = 0
            for f in c.boundaries[j]:
                col ^= 1 << order[f]
            while col:
                low = col.bit_length() - 1
                other = pivots.get(low)
                if other is None:
                    pivots[low] = col
                    paired[low] = pos
                    killed.add(low)
                    negative.add(pos)
                    break
                col ^= other
    bc = Barcode()
    for dm in range(max_dim + 1):
        bars = []
        for pos in by_dim.get(dm, []):
            if pos in negative:
                continue
            death = paired.get(pos)
            b = radius[pos]
            d = INF if death is None else radius[death]
            if d != b:
                bars.append((b, d))
        bc.bars[dm] = sorted(bars, key=lambda x: (x[0], x[1]))
    return bc


def barcode_fixed_k(c: "BigradedComplex", k: int, i: int) -> Barcode:
    full = persistence_fixed_k(c, k, i)
    return Barcode({i: full[i]})


# ---------------------------------------------------------------------------

@dataclass
class HilbertGrid:
    r_grid: list[Fraction]  # squared radii
    k_range: list[int]
    dims: list[int]
    values: np.ndarray  # shape (len(dims), len(k_range), len(r_grid))

    def at(self, ri: int, k: int, i: int) -> int:
        return int(self.values[self.dims.index(i), self.k_range.index(k), ri])


def hilbert(c: "BigradedComplex", r_grid: Sequence[Fraction], k_range: Sequence[int], dims: Sequence[int]) -> HilbertGrid:
    """Hilbert functions on the product grid.

    Each depth layer is reduced once and the Betti numbers at every radius
    are read off its barcode; this equals grade-wise evaluation.
    """
    if not r_grid or not k_range or not dims:
        raise ValueError("grids must be nonempty")
    r_grid, k_range, dims = list(r_grid), list(k_range), list(dims)
    vals = np.zeros((len(dims), len(k_range), len(r_grid)), dtype=np.int64)
    top = max(dims)
    for ki, k in enumerate(k_range):
        bc = persistence_fixed_k(c, k, top)
        for di, i in enumerate(dims):
            for ri, r2 in enumerate(r_grid):
                vals[di, ki, ri] = bc.betti(i, r2)
    return HilbertGrid(r_grid, k_range, dims, vals)
