#!/usr/bin/env python3
"""Where the sequential risk goes: misses, hit-conditional error, and mass slack.

For each n prints the miss rate, the risk over hits only, and the mean
ratio of available in-window mass after nu to the threshold H.  A ratio
close to 1 means the threshold is hit or missed by a coin flip.
"""

import argparse
import math

import numpy as np

from seqkernel import ModelConfig, NoiseSpec, demo_function, estimate_at, simulate_path
from seqkernel.kernel_core import bandwidth, partial_sum_A


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--M", type=int, default=500)
    ap.add_argument("--n", type=int, nargs="*", default=[1000, 5000, 10000, 20000])
    ap.add_argument("--noise", default="gaussian_unit")
    args = ap.parse_args()
    z0 = 1 / math.sqrt(2)
    print(f"{'n':>6} {'miss':>6} {'risk':>8} {'risk|hit':>8} {'mass/H':>7} {'iota':>5} {'2nh':>7}")
    for n in args.n:
        h = bandwidth(1.3, 1 / n)
        errs, hits, ratio = [], [], []
        for r in range(args.M):
            path = simulate_path(ModelConfig(n, demo_function(0.3), NoiseSpec(args.noise), 1, stream=(n, r)))
            res = estimate_at(path, z0, h, 0.3)
            errs.append(abs(res.estimate))
            hits.append(res.hit)
            ratio.append(partial_sum_A(path, res.window, res.nu, n) / res.H)
        errs, hits = np.array(errs), np.array(hits)
        print(f"{n:6d} {1 - hits.mean():6.3f} {errs.mean():8.4f} {errs[hits].mean():8.4f} "
              f"{np.mean(ratio):7.3f} {res.pilot.iota:5d} {2 * n * h:7.1f}")


if __name__ == "__main__":
    main()
