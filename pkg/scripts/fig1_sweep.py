"""Bound-versus-bandwidth sweep for the fig1 preset.

Writes the CSV produced by ``wssuscap sweep`` and prints the critical
bandwidth of each bound.
"""

import argparse
import sys
import time

import numpy as np

from wssuscap import bounds, cli, config


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--preset", default="fig1")
    ap.add_argument("--out", default="fig1.csv")
    ap.add_argument("--points", type=int)
    ap.add_argument("--workers", type=int, default=1)
    args = ap.parse_args()

    sc = config.Scenario.load(args.preset)
    sc.set("sweep.points", args.points)
    t0 = time.perf_counter()
    curve = bounds.sweep(sc.request(), workers=args.workers)
    with open(args.out, "w") as fh:
        fh.write(cli.sweep_csv(sc, curve))
    B = np.array([p.B_eff for p in curve.points])
    print(f"{len(B)} points in {time.perf_counter() - t0:.1f} s -> {args.out}")
    for name in bounds.BOUND_IDS:
        col = curve.column(name)
        if np.all(np.isnan(col)):
            continue
        i = int(np.nanargmax(col))
        print(f"{name:9s} max {col[i]:.6g} nat/s at B = {B[i]:.4g} Hz")
    return 0


if __name__ == "__main__":
    sys.exit(main())
