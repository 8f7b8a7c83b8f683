"""Readers and writers: point files, tiling JSON, Hilbert CSV, barcodes, PGM."""
from __future__ import annotations

import csv
import io
import json
import math
import re
from decimal import Decimal, localcontext
from fractions import Fraction
from pathlib import Path

import numpy as np

from .bifiltration import radius_decimal
from .geometry import PointCloud
from .homology import Barcode, HilbertGrid
from .tiling import Rhomboid, RhomboidTiling

_SPLIT = re.compile(r"[,\s]+")


class PointParseError(ValueError):
    pass


def parse_points_text(text: str, dim: int | None = None) -> PointCloud:
    sites = []
    for ln_no, line in enumerate(text.splitlines(), start=1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        fields = [f for f in _SPLIT.split(line) if f]
        try:
            p = tuple(Fraction(f) for f in fields)
        except (ValueError, ZeroDivisionError):
            raise PointParseError(f"line {ln_no}: cannot parse {line!r} as decimals") from None
        if dim is None:
            dim = len(p)
        if len(p) != dim:
            raise PointParseError(f"line {ln_no}: expected {dim} coordinates, found {len(p)}")
        sites.append(p)
    if dim is None:
        raise PointParseError("no points found")
    return PointCloud(dim, tuple(sites))


def parse_points(path, dim: int | None = None) -> PointCloud:
    return parse_points_text(Path(path).read_text(), dim)


def _fmt(x: Fraction) -> str:
    """Exact decimal when the denominator allows it, else p/q."""
    d = x.denominator
    for f in (2, 5):
        while d % f == 0:
            d //= f
    if d != 1:
        return str(x)
    with localcontext() as ctx:
        ctx.prec = 200
        return format(Decimal(x.numerator) / Decimal(x.denominator), "f")


def format_points(cloud: PointCloud) -> str:
    return "".join(" ".join(_fmt(x) for x in p) + "\n" for p in cloud.sites)


# ---------------------------------------------------------------------------
# tiling JSON

def tiling_to_json(t: RhomboidTiling) -> str:
    keys = sorted(t.cells, key=lambda k: (len(k[1]), k))
    ids = {k: j for j, k in enumerate(keys)}
    cells = []
    for k in keys:
        c = t.cells[k]
        cells.append({
            "id": ids[k],
            "x_in": list(c.x_in),
            "x_on": list(c.x_on),
            "dim": c.dim_cell,
            "r": str(radius_decimal(c.r_val)),
            "r2": str(c.r_val),
            "k_min": c.k_min,
            "k_max": c.k_max,
            "facets": sorted(ids[f] for f in t.facets.get(k, ())),
        })
    doc = {
        "dim": t.cloud.dim,
        "sites": [[str(x) for x in p] for p in t.cloud.sites],
        "depth_limit": t.depth_limit,
        "max_depth": t.max_depth,
        "cells": cells,
    }
    return json.dumps(doc, indent=1)


def tiling_from_json(text: str) -> RhomboidTiling:
    doc = json.loads(text)
    cloud = PointCloud(doc["dim"], tuple(tuple(Fraction(x) for x in p) for p in doc["sites"]))
    by_id = {}
    cells = {}
    for c in doc["cells"]:
        rho = Rhomboid(tuple(c["x_in"]), tuple(c["x_on"]), Fraction(c["r2"]))
        if rho.k_min != c["k_min"] or rho.k_max != c["k_max"] or rho.dim_cell != c["dim"]:
            raise ValueError(f"cell {c['id']}: inconsistent depth or dimension fields")
        by_id[c["id"]] = rho.key
        cells[rho.key] = rho
    facets = {by_id[c["id"]]: tuple(by_id[f] for f in c["facets"]) for c in doc["cells"]}
    return RhomboidTiling(cloud, cells, facets, doc.get("depth_limit"), doc.get("max_depth"))


# ---------------------------------------------------------------------------
# Hilbert CSV, barcodes

def hilbert_csv(h: HilbertGrid) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["r", "k", "dim", "betti"])
    for di, i in enumerate(h.dims):
        for ki, k in enumerate(h.k_range):
            for ri, r2 in enumerate(h.r_grid):
                w.writerow([str(radius_decimal(Fraction(r2))), k, i, int(h.values[di, ki, ri])])
    return buf.getvalue()


def parse_hilbert_csv(text: str) -> list[tuple[str, int, int, int]]:
    rows = list(csv.reader(io.StringIO(text)))
    if rows[0] != ["r", "k", "dim", "betti"]:
        raise ValueError("bad Hilbert CSV header")
    return [(r, int(k), int(i), int(b)) for r, k, i, b in rows[1:]]


def barcode_text(bc: Barcode) -> str:
    lines = []
    for i in sorted(bc.bars):
        for b, d in bc.multiset(i):
            death = "inf" if d == math.inf else str(radius_decimal(d))
            lines.append(f"{i} {radius_decimal(b)} {death}")
    return "\n".join(lines) + ("\n" if lines else "")


def parse_barcode_text(text: str) -> list[tuple[int, float, float]]:
    out = []
    for ln_no, line in enumerate(text.splitlines(), start=1):
        if not line.strip():
            continue
        parts = line.split()
        if len(parts) != 3:
            raise ValueError(f"line {ln_no}: expected '<dim> <birth> <death|inf>'")
        out.append((int(parts[0]), float(parts[1]), math.inf if parts[2] == "inf" else float(parts[2])))
    return out


# ---------------------------------------------------------------------------
# PGM

def hilbert_image(values: np.ndarray, vmax: int = 5) -> np.ndarray:
    """Gray levels for one Hilbert function (rows = k, columns = r).

    0 is white, 1 the lightest non-white gray, darkness grows linearly up to
    vmax and everything above vmax is black.  The first k is the bottom row.
    """
    if vmax < 1:
        raise ValueError("vmax must be at least 1")
    v = np.asarray(values)
    gray = np.rint(255 * (1 - np.clip(v, 0, vmax) / (vmax + 1))).astype(np.int64)
    gray[v > vmax] = 0
    return gray[::-1]


def write_pgm(gray: np.ndarray, scale: int = 1) -> str:
    g = np.kron(gray, np.ones((scale, scale), dtype=np.int64)) if scale > 1 else gray
    h, w = g.shape
    body = "\n".join(" ".join(str(int(x)) for x in row) for row in g)
    return f"P2\n{w} {h}\n255\n{body}\n"


def read_pgm(text: str) -> np.ndarray:
    tokens = [t for line in text.splitlines() for t in line.split("#", 1)[0].split()]
    if tokens[0] != "P2":
        raise ValueError("only plain (P2) PGM is supported")
    w, h, _ = int(tokens[1]), int(tokens[2]), int(tokens[3])
    return np.array([int(t) for t in tokens[4:4 + w * h]]).reshape(h, w)
