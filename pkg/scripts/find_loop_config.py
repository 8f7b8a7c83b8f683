"""Search for 7 sites and a radius where the 2-fold cover has no 1-cycle
but the 3-fold cover has one.

Candidates are screened with the rhomboid model, then confirmed with the
nerve oracle.  Prints the first hit as integer coordinates and r^2.
"""
import argparse
from fractions import Fraction

import numpy as np

from multicover.bifiltration import build_rhomb
from multicover.geometry import PointCloud, check_general_position
from multicover.homology import barcode_fixed_k
from multicover.oracle import oracle_betti
from multicover.tiling import enumerate_rhomboids


def candidate_radii(bars2, bars3):
    ends = sorted({x for b in bars2 + bars3 for x in b if x != float("inf")})
    # midpoints between consecutive events, plus one past the last
    mids = [(a + b) / 2 for a, b in zip(ends, ends[1:])]
    return mids


def search(seed: int, tries: int, grid: int):
    rng = np.random.default_rng(seed)
    for attempt in range(tries):
        # perturbed hexagon plus a centre point, the usual shape of the picture
        ang = np.linspace(0, 2 * np.pi, 7)[:6] + rng.uniform(-0.3, 0.3, 6)
        rad = rng.uniform(0.6, 1.0, 6)
        pts = np.c_[rad * np.cos(ang), rad * np.sin(ang)]
        pts = np.vstack([pts, rng.uniform(-0.2, 0.2, (1, 2))])
        ints = np.round((pts + 1.2) * grid).astype(int)
        cloud = PointCloud.from_points([tuple(Fraction(int(v)) for v in p) for p in ints])
        if not check_general_position(cloud).ok:
            continue
        c = build_rhomb(enumerate_rhomboids(cloud))
        b2 = barcode_fixed_k(c, 2, 1)[1]
        b3 = barcode_fixed_k(c, 3, 1)[1]
        for r2 in candidate_radii(b2, b3):
            n2 = sum(1 for b, d in b2 if b <= r2 < d)
            n3 = sum(1 for b, d in b3 if b <= r2 < d)
            if n2 == 0 and n3 == 1:
                if oracle_betti(cloud, r2, 2, 1) == 0 and oracle_betti(cloud, r2, 3, 1) == 1:
                    return attempt, [tuple(int(v) for v in p) for p in ints], r2
    return None


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--tries", type=int, default=500)
    ap.add_argument("--grid", type=int, default=10)
    args = ap.parse_args()
    hit = search(args.seed, args.tries, args.grid)
    if hit is None:
        print("no configuration found")
        return 1
    attempt, pts, r2 = hit
    print(f"attempt {attempt}")
    print("sites", pts)
    print("r2", r2, float(r2) ** 0.5)
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
