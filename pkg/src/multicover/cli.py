"""Command line: multicover {generate,tiling,betti,barcode,hilbert,firep,stats,validate}."""
from __future__ import annotations

import argparse
import contextlib
import json
import logging
import sys
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path

import numpy as np

from .bifiltration import (
    Bigrade,
    BigradedComplex,
    assemble_firep,
    build_rhomb,
    build_sdel,
    build_srhomb,
    firep_eval,
    radius_decimal,
    snap_grades,
    write_firep,
)
from .generators import KINDS, GeneratorSpec, generate, to_cloud
from .geometry import PointCloud, check_general_position, miniball
from .homology import Barcode, HilbertGrid, barcode_fixed_k, betti_at_grade, euler_at_grade, hilbert
from .io import barcode_text, format_points, hilbert_csv, hilbert_image, parse_points, tiling_to_json, write_pgm
from .oracle import MAX_SITES, oracle_barcode, oracle_betti
from .tiling import enumerate_rhomboids, slice_tiling, tiling_stats

log = logging.getLogger("multicover")

COMMANDS = ("generate", "tiling", "betti", "barcode", "hilbert", "firep", "stats", "validate")
MODELS = ("rhomb", "srhomb", "sdel", "cech-oracle")


class PipelineError(RuntimeError):
    pass


@dataclass
class RunConfig:
    command: str
    input: str | None = None
    generator: GeneratorSpec | None = None
    dim: int | None = None
    max_k: int | None = None  # truncation depth K
    snap: int | None = None
    model: str = "rhomb"
    hom_dims: list[int] = field(default_factory=lambda: [0, 1])
    r_grid: tuple[Fraction, Fraction | None, int] = (Fraction(0), None, 20)  # radii, None = meb radius
    k_range: tuple[int, int] | None = None
    seed: int = 0
    out: str = "out"
    jitter: Fraction | None = None
    vmax: int = 5
    r: Fraction | None = None  # single radius for `betti`
    k: int | None = None

    def __post_init__(self):
        if self.command not in COMMANDS:
            raise ValueError(f"unknown command {self.command!r}")
        if self.dim is not None and self.dim not in (1, 2, 3):
            raise ValueError("--dim must be 1, 2 or 3")
        if self.max_k is not None and self.max_k < 1:
            raise ValueError("--max-k must be at least 1")
        if self.snap is not None and self.snap != 0 and self.snap < 2:
            raise ValueError("--snap must be at least 2 (or 0 to disable)")
        if self.model not in MODELS:
            raise ValueError(f"unknown model {self.model!r}")
        if any(i < 0 for i in self.hom_dims):
            raise ValueError("homology degrees must be nonnegative")


@contextlib.contextmanager
def stage(name: str):
    log.info("stage %s", name)
    try:
        yield
    except PipelineError:
        raise
    except Exception as e:
        raise PipelineError(f"[{name}] {type(e).__name__}: {e}") from e


# ---------------------------------------------------------------------------

def load_cloud(cfg: RunConfig) -> PointCloud:
    if cfg.input:
        cloud = parse_points(cfg.input, cfg.dim)
    else:
        cloud = generate(cfg.generator or GeneratorSpec(seed=cfg.seed))
    if cfg.dim is not None and cloud.dim != cfg.dim:
        raise ValueError(f"cloud has dimension {cloud.dim}, --dim says {cfg.dim}")
    if cfg.jitter:
        rng = np.random.default_rng(cfg.seed)
        arr = np.array([[float(x) for x in p] for p in cloud.sites])
        cloud = to_cloud(arr + rng.uniform(-float(cfg.jitter), float(cfg.jitter), arr.shape))
    return cloud


def radius_grid(cfg: RunConfig, cloud: PointCloud) -> list[Fraction]:
    a, b, n = cfg.r_grid
    if b is None:
        b2 = miniball(cloud.sites).radius_sq
        # largest radius worth looking at; keep it rational by squaring the grid
        return [b2 * j * j / ((n - 1) ** 2) for j in range(n)] if a == 0 else _lin(a, _sqrt_up(b2), n)
    return _lin(a, b, n)


def _sqrt_up(x: Fraction) -> Fraction:
    return Fraction(str(radius_decimal(x))) + Fraction(1, 10 ** 15)


def _lin(a: Fraction, b: Fraction, n: int) -> list[Fraction]:
    if n == 1:
        return [a * a]
    return [(a + (b - a) * j / (n - 1)) ** 2 for j in range(n)]


def analysis_depth(cfg: RunConfig, cloud: PointCloud) -> int | None:
    """Enumeration depth needed for correct homology at every k <= max_k.

    Rhomb^{<=K} (cells with k_max <= K) has the multicover homology only for
    k <= K - d, so the rhomboid model is built d levels deeper for the
    homology commands.  The sliced models are exact up to K.
    """
    K = cfg.max_k
    if K is None or cfg.model != "rhomb" or cfg.command not in ("betti", "barcode", "hilbert"):
        return K
    return min(K + cloud.dim, cloud.n)


def build_model(cfg: RunConfig, t, model: str) -> BigradedComplex:
    if model == "rhomb":
        return build_rhomb(t, t.depth_limit)
    sliced = slice_tiling(t, cfg.max_k)
    return build_srhomb(sliced) if model == "srhomb" else build_sdel(sliced)


class Analysis:
    """Betti numbers and barcodes for either a built complex or the oracle."""

    def __init__(self, cloud: PointCloud, complex_: BigradedComplex | None):
        self.cloud = cloud
        self.c = complex_

    def betti(self, r2, k, i) -> int:
        if self.c is None:
            return oracle_betti(self.cloud, r2, k, i)
        return betti_at_grade(self.c, Bigrade(r2, k), i)

    def barcode(self, k, i) -> Barcode:
        if self.c is None:
            return oracle_barcode(self.cloud, k, i) if k <= self.cloud.n else Barcode({i: []})
        return barcode_fixed_k(self.c, k, i)

    def hilbert(self, r_grid, k_range, dims) -> HilbertGrid:
        if self.c is not None:
            return hilbert(self.c, r_grid, k_range, dims)
        vals = np.zeros((len(dims), len(k_range), len(r_grid)), dtype=np.int64)
        for di, i in enumerate(dims):
            for ki, k in enumerate(k_range):
                bc = self.barcode(k, i)
                for ri, r2 in enumerate(r_grid):
                    vals[di, ki, ri] = bc.betti(i, r2)
        return HilbertGrid(list(r_grid), list(k_range), list(dims), vals)


def validate(cloud: PointCloud, r_grid, k_range, dims) -> tuple[bool, list[str]]:
    """Cross-model equality report on a small cloud."""
    if cloud.n > MAX_SITES:
        raise ValueError(f"validation runs the oracle, which is limited to {MAX_SITES} sites")
    lines = []
    ok = True
    report = check_general_position(cloud)
    lines.append(f"general position: {report.describe()}")
    if not report.ok:
        return False, lines
    t = enumerate_rhomboids(cloud)
    sliced = slice_tiling(t)
    models = {"rhomb": build_rhomb(t), "srhomb": build_srhomb(sliced), "sdel": build_sdel(sliced)}
    for name, c in models.items():
        good = c.check_dd_zero() and c.check_boundary_closure()
        ok &= good
        lines.append(f"{name}: {len(c)} cells, boundary checks {'ok' if good else 'FAILED'}")
    mismatches = euler_bad = 0
    for k in k_range:
        for r2 in r_grid:
            g = Bigrade(r2, k)
            for i in dims:
                vals = [betti_at_grade(c, g, i) for c in models.values()] + [oracle_betti(cloud, r2, k, i)]
                mismatches += len(set(vals)) > 1
            for c in models.values():
                top = c.top_dim
                chi = sum((-1) ** i * betti_at_grade(c, g, i) for i in range(top + 1))
                euler_bad += chi != euler_at_grade(c, g)
    lines.append(f"betti across rhomb/srhomb/sdel/oracle: {mismatches} mismatching grades")
    lines.append(f"euler characteristic: {euler_bad} inconsistent grades")
    bc_bad = 0
    for k in range(1, cloud.n + 1):
        for i in dims:
            bc_bad += barcode_fixed_k(models["rhomb"], k, i).multiset(i) != oracle_barcode(cloud, k, i).multiset(i)
    lines.append(f"fixed-k barcodes vs oracle: {bc_bad} mismatches")
    fp_bad = 0
    for i in dims:
        if i > models["rhomb"].top_dim - 1:
            continue
        doc = assemble_firep(models["rhomb"], i)
        for k in k_range:
            for r2 in r_grid:
                fp_bad += firep_eval(doc, Bigrade(r2, k)) != betti_at_grade(models["rhomb"], Bigrade(r2, k), i)
    lines.append(f"firep evaluation vs betti: {fp_bad} mismatches")
    ok &= mismatches == 0 and euler_bad == 0 and bc_bad == 0 and fp_bad == 0
    lines.append("PASS" if ok else "FAIL")
    return ok, lines


def run_pipeline(cfg: RunConfig) -> dict[str, str]:
    """Run one command; returns {file name: contents}."""
    art: dict[str, str] = {}
    with stage("load"):
        cloud = load_cloud(cfg)
    if cfg.command == "generate":
        art["points.txt"] = format_points(cloud)
        return art
    K = cfg.max_k
    k_lo, k_hi = cfg.k_range or (1, min(K or cloud.n, cloud.n, 4))
    k_range = list(range(k_lo, k_hi + 1))
    if K is not None and k_hi > K:
        raise PipelineError(f"[config] k-range reaches {k_hi} beyond --max-k {K}")
    if cfg.command == "validate":
        with stage("validate"):
            ok, lines = validate(cloud, radius_grid(cfg, cloud), k_range, cfg.hom_dims)
        art["validate.txt"] = "\n".join(lines) + "\n"
        return art

    oracle = cfg.model == "cech-oracle"
    if oracle and cfg.command in ("tiling", "firep", "stats"):
        raise PipelineError(f"[model] {cfg.command} is not available for the oracle model")
    t = None
    if not oracle:
        with stage("tiling"):
            t = enumerate_rhomboids(cloud, max_depth=analysis_depth(cfg, cloud))
    if cfg.command == "tiling":
        art["tiling.json"] = tiling_to_json(t)
        return art
    if cfg.command == "stats":
        with stage("stats"):
            art["stats.json"] = json.dumps(stats_record(cfg, cloud, t), indent=1) + "\n"
        return art

    c = None
    if not oracle:
        with stage("build"):
            if cfg.command == "firep" and cfg.model == "sdel":
                raise ValueError("FIREP export needs a 1-critical model; sdel is multi-critical")
            c = build_model(cfg, t, cfg.model)
        snap = cfg.snap if cfg.snap is not None else (100 if cfg.command == "firep" else 0)
        if snap:
            with stage("snap"):
                c = snap_grades(c, snap)
    an = Analysis(cloud, c)

    if cfg.command == "firep":
        with stage("firep"):
            for i in cfg.hom_dims:
                art[f"firep_h{i}.txt"] = write_firep(assemble_firep(c, i, k_max=K))
    elif cfg.command == "betti":
        with stage("betti"):
            if cfg.r is not None:
                grades = [(cfg.r * cfg.r, cfg.k if cfg.k is not None else k_range[0])]
            else:
                grades = [(r2, k) for k in k_range for r2 in radius_grid(cfg, cloud)]
            rows = ["r,k,dim,betti"]
            for r2, k in grades:
                for i in cfg.hom_dims:
                    rows.append(f"{radius_decimal(r2)},{k},{i},{an.betti(r2, k, i)}")
            art["betti.csv"] = "\n".join(rows) + "\n"
    elif cfg.command == "barcode":
        with stage("barcode"):
            for k in k_range:
                bars = {i: an.barcode(k, i)[i] for i in cfg.hom_dims}
                art[f"barcode_k{k}.txt"] = barcode_text(Barcode(bars))
    elif cfg.command == "hilbert":
        with stage("hilbert"):
            grid = radius_grid(cfg, cloud)
            h = an.hilbert(grid, k_range, cfg.hom_dims)
            art["hilbert.csv"] = hilbert_csv(h)
            for di, i in enumerate(h.dims):
                art[f"hilbert_h{i}.pgm"] = write_pgm(hilbert_image(h.values[di], cfg.vmax))
    return art


def stats_record(cfg: RunConfig, cloud: PointCloud, t) -> dict:
    s = tiling_stats(t)
    rec = {
        "n": s.n,
        "dim": s.dim,
        "cells": s.total,
        "bound": s.bound,
        "cells_per_dim": s.per_dim,
        "cells_per_kmin": s.per_kmin,
        "top_cells": s.top_cells,
        "voronoi_vertices": s.voronoi_vertices,
    }
    K = cfg.max_k
    if K is not None:
        rh = build_rhomb(t, K)
        sr = build_srhomb(slice_tiling(t, K))
        rec["K"] = K
        rec["rhomb_cells"] = len(rh)
        rec["srhomb_cells"] = len(sr)
        rec["size"] = size_of(rh)
        rec["size_per_point"] = rec["size"] / (cloud.n * K * K)
        if rh.top_dim >= 2:
            a, b = assemble_firep(rh, 1).size, assemble_firep(sr, 1).size
            rec["firep_rhomb"], rec["firep_srhomb"], rec["firep_ratio"] = a, b, a / b
    return rec


def size_of(c: BigradedComplex) -> int:
    """Number of cells alive at some k >= 1."""
    return sum(1 for gs in c.grades if max(g.k for g in gs) >= 1)


def write_outputs(artifacts: dict[str, str], out_dir) -> list[Path]:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    written = []
    try:
        for name, text in artifacts.items():
            p = out / name
            p.write_text(text)
            written.append(p)
    except OSError:
        for p in written:
            p.unlink(missing_ok=True)
        raise
    return written


# ---------------------------------------------------------------------------
# argument parsing

def _r_grid(s: str):
    try:
        a, b, n = s.split(":")
        n = int(n)
    except ValueError:
        raise argparse.ArgumentTypeError("expected a:b:n") from None
    if n < 1:
        raise argparse.ArgumentTypeError("grid needs at least one point")
    return Fraction(a), (None if b in ("", "auto") else Fraction(b)), n


def _k_range(s: str):
    try:
        a, b = (int(x) for x in s.split(":"))
    except ValueError:
        raise argparse.ArgumentTypeError("expected a:b") from None
    if a < 1 or b < a:
        raise argparse.ArgumentTypeError("need 1 <= a <= b")
    return a, b


def _dims(s: str):
    try:
        return [int(x) for x in s.split(",")]
    except ValueError:
        raise argparse.ArgumentTypeError("expected i[,i...]") from None


DEFAULTS = dict(
    dim=None, max_k=None, snap=None, seed=0, model="rhomb", hom_dim=[0, 1],
    r_grid=(Fraction(0), None, 20), k_range=None, out="out", verbose=False,
)


def _global_flags(p: argparse.ArgumentParser):
    S = argparse.SUPPRESS
    p.add_argument("--dim", type=int, choices=(1, 2, 3), default=S)
    p.add_argument("--max-k", type=int, default=S, help="truncation depth K")
    p.add_argument("--snap", type=int, default=S, help="snap radii to N grid values (firep default 100, 0 = off)")
    p.add_argument("--seed", type=int, default=S)
    p.add_argument("--model", choices=MODELS, default=S)
    p.add_argument("--hom-dim", type=_dims, default=S, help="homology degrees, e.g. 0,1")
    p.add_argument("--r-grid", type=_r_grid, default=S, help="radii a:b:n (b may be 'auto')")
    p.add_argument("--k-range", type=_k_range, default=S, help="depths a:b inclusive")
    p.add_argument("--out", default=S, help="output directory")
    p.add_argument("-v", "--verbose", action="store_true", default=S)


def make_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="multicover", description="Multicover bifiltrations from rhomboid tilings.")
    _global_flags(ap)
    sub = ap.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        sp = sub.add_parser(name)
        _global_flags(sp)
        sp.add_argument("input", nargs="?", help="point file (one point per line)")
        sp.add_argument("--generate", dest="kind", choices=KINDS, help="sample a cloud instead of reading one")
        sp.add_argument("--n", type=int, default=100)
        sp.add_argument("--p", type=float, default=0.0, help="percent uniform noise (noisy-annulus)")
        sp.add_argument("--err", type=float, default=0.05, help="perturbation bound (annulus)")
        sp.add_argument("--radius", type=float, default=0.25, help="annulus radius")
        sp.add_argument("--jitter", type=Fraction, default=None, help="seeded uniform perturbation magnitude")
        if name == "betti":
            sp.add_argument("--r", type=Fraction, default=None, help="single radius")
            sp.add_argument("--k", type=int, default=None, help="single depth")
        if name == "hilbert":
            sp.add_argument("--vmax", type=int, default=5, help="Hilbert value shaded black")
    return ap


def config_from_args(ns: argparse.Namespace) -> RunConfig:
    vals = {**DEFAULTS, **vars(ns)}
    gen = None
    if vals["input"] is None:
        kind = vals["kind"] or ("uniform-cube" if vals["dim"] == 3 else "uniform-square")
        gen = GeneratorSpec(kind, vals["n"], vals["radius"], vals["p"], vals["err"], vals["seed"])
    elif vals["kind"]:
        raise PipelineError("[config] give either an input file or --generate, not both")
    return RunConfig(
        command=vals["command"], input=vals["input"], generator=gen, dim=vals["dim"],
        max_k=vals["max_k"], snap=vals["snap"], model=vals["model"], hom_dims=vals["hom_dim"],
        r_grid=vals["r_grid"], k_range=vals["k_range"], seed=vals["seed"], out=vals["out"],
        jitter=vals["jitter"], vmax=vals.get("vmax", 5), r=vals.get("r"), k=vals.get("k"),
    )


def main(argv=None) -> int:
    ns = make_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if getattr(ns, "verbose", False) else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        cfg = config_from_args(ns)
        art = run_pipeline(cfg)
    except PipelineError as e:
        print(f"error: {e}", file=sys.stderr)
        return 1
    except ValueError as e:
        print(f"error: [config] {e}", file=sys.stderr)
        return 2
    for p in write_outputs(art, cfg.out):
        print(p)
    if cfg.command == "validate":
        report = art["validate.txt"]
        sys.stdout.write(report)
        return 0 if report.rstrip().endswith("PASS") else 1
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
