"""ISI/ICI bound e4 of the matched Gaussian pulse against the grid ratio T/F.

At fixed TF the minimum sits near T/F = tau_max/nu_max, where the lattice
is matched to the support of the scattering function.
"""

import argparse

import numpy as np

from wssuscap import pulse_design
from wssuscap.scattering import Brick, make_scattering


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--nu-max", type=float, default=50.0)
    ap.add_argument("--tau-max", type=float, default=1e-3)
    ap.add_argument("--tf", type=float, default=1.25)
    ap.add_argument("--ratios", type=int, default=21)
    ap.add_argument("--radius", type=int, default=5)
    args = ap.parse_args()

    sf = make_scattering(Brick(), args.nu_max, args.tau_max)
    q0 = args.tau_max / args.nu_max
    rows = pulse_design.grid_ratio_sweep(sf, args.tf, q0 * np.logspace(-1, 1, args.ratios),
                                         args.radius)
    print("ratio_over_matched,e4,e4_tail")
    for q, v, tail in rows:
        print(f"{q / q0:.4g},{v:.6g},{tail:.3g}")
    finite = [(v, q) for q, v, _ in rows if np.isfinite(v)]
    if finite:
        v, q = min(finite)
        print(f"# minimum e4 = {v:.6g} at T/F = {q / q0:.4g} x tau_max/nu_max")


if __name__ == "__main__":
    main()
