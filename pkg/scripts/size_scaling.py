"""Cell counts and FIREP sizes of the depth-truncated bifiltrations.

For uniform samples of growing size, prints the number of Rhomb^{<=K} cells
(k >= 1), that count divided by n K^2, and the H1 FIREP sizes of the rhomboid
and sliced models.  The column "ratio K+1" repeats the comparison with the
rhomboid complex truncated one level deeper.
"""
import argparse
import time

from multicover.bifiltration import assemble_firep, build_rhomb, build_srhomb, truncate
from multicover.cli import size_of
from multicover.generators import GeneratorSpec, generate
from multicover.tiling import enumerate_rhomboids, slice_tiling


def row(n: int, K: int, seed: int) -> dict:
    t0 = time.perf_counter()
    cloud = generate(GeneratorSpec("uniform-square", n, seed=seed))
    # one extra level so the K+1 comparison can be made from the same tiling
    t = enumerate_rhomboids(cloud, max_depth=K + 1)
    R = build_rhomb(truncate(t, K))
    S = build_srhomb(slice_tiling(t, K))
    a = assemble_firep(R, 1).size
    b = assemble_firep(S, 1).size
    a1 = assemble_firep(build_rhomb(truncate(t, K + 1)), 1, k_max=K).size
    return {
        "n": n,
        "size": size_of(R),
        "norm": size_of(R) / (n * K * K),
        "firep_rhomb": a,
        "firep_srhomb": b,
        "ratio": a / b,
        "ratio_K+1": a1 / b,
        "seconds": time.perf_counter() - t0,
    }


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--n", type=int, nargs="+", default=[250, 500, 1000])
    ap.add_argument("--max-k", type=int, default=4)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()
    cols = ["n", "size", "norm", "firep_rhomb", "firep_srhomb", "ratio", "ratio_K+1", "seconds"]
    print("  ".join(f"{c:>12}" for c in cols))
    for n in args.n:
        r = row(n, args.max_k, args.seed)
        print("  ".join(f"{r[c]:>12.3f}" if isinstance(r[c], float) else f"{r[c]:>12}" for c in cols))


if __name__ == "__main__":
    main()
