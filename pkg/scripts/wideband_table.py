"""Wideband slope coefficients kappa1, kappa1_lb and their ratio.

Rows sweep the spread of a brick scattering function and the grid product
TF; the ratio tends to (sigma - 2 TF) / sigma once the PAPR exceeds 2 TF / sigma.
"""

import argparse
import itertools

from wssuscap import bounds
from wssuscap.scattering import Brick, PowerSpec, design_grid, make_scattering


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--kappa", type=float, default=1.0)
    ap.add_argument("--power", type=float, default=1.0)
    args = ap.parse_args()

    print("spread,tf,sigma,regime,kappa1,kappa1_lb,ratio")
    for spread, tf in itertools.product((1e-5, 1e-4, 1e-3, 1e-2), (1.1, 1.25, 2.0)):
        tau = 0.5e-6
        nu = spread / (4 * tau)
        sf = make_scattering(Brick(), nu, tau)
        grid = design_grid(nu, tau, tf)
        tc = bounds.kappa1(PowerSpec(args.power, args.kappa), sf, grid)
        regime = "peaky" if tc.peaky_regime else "flat"
        print(f"{spread:g},{tf:g},{tc.sigma:.6g},{regime},{tc.kappa1:.6g},"
              f"{tc.kappa1_lb:.6g},{tc.ratio:.6f}")


if __name__ == "__main__":
    main()
