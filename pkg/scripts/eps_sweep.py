#!/usr/bin/env python3
"""Sensitivity of the sequential risk tables to the projection margin eps."""

import argparse

from seqkernel import PUBLISHED_RISKS, preset, run_risk

EPS = (0.05, 0.1, 0.2, 0.3)


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--M", type=int, default=3000)
    ap.add_argument("--threads", type=int, default=1)
    ap.add_argument("--tables", nargs="*",
                    default=["paper-7.1-gaussian", "paper-7.1-uniform", "paper-7.1-exponential"])
    args = ap.parse_args()
    for name in args.tables:
        print(f"\n{name}: published " + " ".join(f"{r:.3f}" for r in PUBLISHED_RISKS[name]))
        for eps in EPS:
            t = run_risk(preset(name, replications=args.M, eps=eps), workers=args.threads)
            print(f"  eps={eps:<5} " + " ".join(f"{r:.4f}" for r in t.risks()))


if __name__ == "__main__":
    main()
