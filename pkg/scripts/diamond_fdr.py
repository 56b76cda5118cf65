"""FDR and power of both DAGGER variants on the 125/250/125 diamond DAG.

Writes a CSV to stdout; rows are (pi0, method) pairs.
"""

from __future__ import annotations

import argparse
import sys

from dagfdr.sim import SHAPES, SimConfig, grid_csv


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--reps", type=int, default=1000)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--alpha", type=float, default=0.2)
    ap.add_argument("--pi0", default="0.2,0.5,0.8")
    ap.add_argument("--workers", type=int, default=1)
    args = ap.parse_args(argv)

    layers, k = SHAPES["diamond"]
    cfg = SimConfig(layers=layers, parents_per_node=k, alpha=args.alpha, reps=args.reps, seed=args.seed)
    pi0 = [float(x) for x in args.pi0.split(",")]
    sys.stdout.write(grid_csv(cfg, pi0, ["dagger-plain", "dagger-reshaped"], args.workers))
    return 0


if __name__ == "__main__":
    sys.exit(main())
