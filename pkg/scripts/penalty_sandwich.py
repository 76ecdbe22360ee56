"""Lower, exact and circulant penalties as the number of frequency slots doubles.

Per-slot SNR is held fixed so the per-Hz numbers are comparable across rows.
"""

import argparse

from wssuscap import bounds
from wssuscap.bounds import CirculantPenalty
from wssuscap.scattering import Brick, GridParams, PowerSpec, make_scattering


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--T", type=float, default=0.08)
    ap.add_argument("--F", type=float, default=3.53e5)
    ap.add_argument("--slots", type=int, nargs="+", default=[4, 8, 16, 32, 64])
    ap.add_argument("--snr", type=float, nargs="+", default=[0.1, 1.0, 10.0])
    args = ap.parse_args()

    sf = make_scattering(Brick(), 5.0, 0.5e-6)
    grid = GridParams(args.T, args.F)
    print("snr,slots,lower,exact,circulant,gap_per_hz")
    for rho in args.snr:
        for K in args.slots:
            B = K * grid.F
            power = PowerSpec(rho * B / grid.tf)
            lo = bounds.lower_penalty(B, 1.0, power, sf)
            ex = bounds.exact_penalty(B, 1.0, power, sf, grid)
            up = CirculantPenalty(sf, grid, K, method="dft").penalty(B, 1.0, power)
            print(f"{rho:g},{K},{lo:.10g},{ex:.10g},{up:.10g},{(up - lo) / B:.6g}")


if __name__ == "__main__":
    main()
