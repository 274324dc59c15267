"""Fine-grid oracle for the mean time at 0 of sticky paths up to T.

Prints the unweighted (sampling-measure) and likelihood-reweighted means of
the occupation time with their standard errors.  The values frozen in
``tanakasim.harness.scenarios`` came from::

    python scripts/oracle_occupation.py --paths 100000 --substeps 100 --seed 20240917
"""

import argparse
import time

import numpy as np

from tanakasim.girsanov import girsanov_weight, weighted_mean
from tanakasim.paths import TimeGrid, streams_for
from tanakasim.sticky import sticky_batch


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--lam", type=float, default=1.0)
    ap.add_argument("--horizon", type=float, default=1.0)
    ap.add_argument("--dt", type=float, default=1e-3)
    ap.add_argument("--substeps", type=int, default=100)
    ap.add_argument("--paths", type=int, default=100_000)
    ap.add_argument("--chunk", type=int, default=50)
    ap.add_argument("--seed", type=int, default=20240917)
    args = ap.parse_args()

    grid = TimeGrid.uniform(args.horizon, args.dt)
    occ = np.empty(args.paths)
    bT = np.empty(args.paths)
    t0 = time.time()
    for start in range(0, args.paths, args.chunk):
        stop = min(start + args.chunk, args.paths)
        tr = sticky_batch(0.0, args.lam, grid, streams_for(args.seed, range(start, stop)),
                          substeps=args.substeps)
        occ[start:stop] = tr.occ0.values[:, -1]
        bT[start:stop] = tr.b.values[:, -1]
    w = girsanov_weight(bT, args.lam, args.horizon)
    q = weighted_mean(values=occ)
    p = weighted_mean(values=occ, weights=w)
    print(f"ds={args.dt / args.substeps:g} paths={args.paths} seconds={time.time() - t0:.0f}")
    print(f"Q mean occupation {q[0]:.6f} stderr {q[1]:.6f}")
    print(f"P mean occupation {p[0]:.6f} stderr {p[1]:.6f} ess {p[2]:.0f}")


if __name__ == "__main__":
    main()
