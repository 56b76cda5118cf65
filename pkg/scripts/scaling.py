"""Wall-clock time of a full run (counts plus the top-down pass) as N doubles."""

from __future__ import annotations

import argparse
import sys
import time

from dagfdr.counts import compute_effective_counts
from dagfdr.procedure import BY_SUGGESTED, RESHAPED, DaggerConfig, run_batch
from dagfdr.sim import assign_truth, gen_layered_dag, gen_pvalues_gaussian, linear_mu_schedule, stream


def time_run(N: int, depth: int, k: int, cfg: DaggerConfig, seed: int) -> tuple[float, float, int]:
    t0 = time.perf_counter()
    g = gen_layered_dag([N // depth] * depth, k, stream(seed, 0, 0))
    build = time.perf_counter() - t0
    p = gen_pvalues_gaussian(g, assign_truth(g, 0.5, stream(seed, 1, 0)), linear_mu_schedule(depth), stream(seed, 2, 0))
    t0 = time.perf_counter()
    res = run_batch(g, compute_effective_counts(g), p, cfg)
    return build, time.perf_counter() - t0, res.R_total


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--sizes", default="12500,25000,50000,100000,200000")
    ap.add_argument("--depth", type=int, default=4)
    ap.add_argument("--k", type=int, default=2)
    ap.add_argument("--reshaped", action="store_true")
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args(argv)

    cfg = DaggerConfig(0.2, RESHAPED, BY_SUGGESTED) if args.reshaped else DaggerConfig(0.2)
    prev = None
    print("N\tbuild_s\trun_s\tratio\trejections")
    for N in (int(x) for x in args.sizes.split(",")):
        build, run, R = time_run(N, args.depth, args.k, cfg, args.seed)
        ratio = f"{run / prev:.2f}" if prev else "-"
        print(f"{N}\t{build:.3f}\t{run:.3f}\t{ratio}\t{R}")
        prev = run
    return 0


if __name__ == "__main__":
    sys.exit(main())
