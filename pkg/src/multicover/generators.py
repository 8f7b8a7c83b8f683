"""Seeded random point clouds: uniform square/cube, disk, annulus, noisy annulus.

Coordinates are rounded to 12 decimals and converted exactly, so a cloud
written to disk and parsed back is the same cloud.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .geometry import PointCloud, check_general_position

log = logging.getLogger(__name__)

KINDS = ("uniform-square", "uniform-cube", "disk", "annulus", "noisy-annulus")
DIGITS = 12
GP_CHECK_LIMIT = 20000  # (d+1)-subsets checked exhaustively up to this many
MAX_RETRIES = 20


@dataclass(frozen=True)
class GeneratorSpec:
    kind: str = "uniform-square"
    n: int = 100
    radius: float = 0.25  # annulus core circle
    p: float = 0.0  # percentage of uniform background noise
    err: float = 0.05  # per-coordinate perturbation bound
    seed: int = 0

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown generator {self.kind!r}; choose from {', '.join(KINDS)}")
        if self.n < 1:
            raise ValueError("n must be positive")
        if not 0 <= self.p <= 100:
            raise ValueError("noise percentage must lie in [0, 100]")
        if self.err < 0:
            raise ValueError("perturbation bound must be nonnegative")

    @property
    def dim(self) -> int:
        return 3 if self.kind == "uniform-cube" else 2


def _circle(rng, m, radius, err):
    theta = rng.uniform(0, 2 * np.pi, m)
    pts = 0.5 + radius * np.c_[np.cos(theta), np.sin(theta)]
    return pts + rng.uniform(-err, err, (m, 2))


def sample(spec: GeneratorSpec, rng: np.random.Generator) -> np.ndarray:
    n = spec.n
    if spec.kind == "uniform-square":
        return rng.uniform(0, 1, (n, 2))
    if spec.kind == "uniform-cube":
        return rng.uniform(0, 1, (n, 3))
    if spec.kind == "disk":
        # uniform in the disk of radius 1/2 inscribed in the unit square
        theta = rng.uniform(0, 2 * np.pi, n)
        rad = 0.5 * np.sqrt(rng.uniform(0, 1, n))
        return 0.5 + np.c_[rad * np.cos(theta), rad * np.sin(theta)]
    if spec.kind == "annulus":
        return _circle(rng, n, spec.radius, spec.err)
    n_noise = int(round(n * spec.p / 100))
    pts = np.vstack([_circle(rng, n - n_noise, spec.radius, spec.err), rng.uniform(0, 1, (n_noise, 2))])
    return pts[rng.permutation(n)]


def to_cloud(arr: np.ndarray) -> PointCloud:
    sites = [tuple(Fraction(f"{x:.{DIGITS}f}") for x in row) for row in arr]
    return PointCloud(arr.shape[1], tuple(sites))


def generate(spec: GeneratorSpec) -> PointCloud:
    """Deterministic under the seed; degenerate draws are redrawn, then rejected."""
    rng = np.random.default_rng(spec.seed)
    for attempt in range(MAX_RETRIES):
        cloud = to_cloud(sample(spec, rng))
        report = check_general_position(cloud, max_subsets=GP_CHECK_LIMIT)
        if report.ok:
            return cloud
        log.info("draw %d rejected: %s", attempt, report.describe())
    raise RuntimeError(f"no generic sample after {MAX_RETRIES} draws ({report.describe()})")
