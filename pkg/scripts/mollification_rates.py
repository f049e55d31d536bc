"""Slope of ||v^eps - v||_{L^2} against eps for lacunary fields of planted smoothness.

    python scripts/mollification_rates.py --n 1024 --alpha 0.25 0.5
"""

import argparse

import numpy as np

from besovflux.dyadic import make_partition
from besovflux.grid import TorusGrid
from besovflux.fields import lacunary_field
from besovflux.mollify import mollification_rates
from besovflux.norms import BesovSpec


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--n", type=int, default=1024)
    ap.add_argument("--alpha", type=float, nargs="+", default=[0.25, 1 / 3, 0.5])
    ap.add_argument("--seed", type=int, default=11)
    args = ap.parse_args()

    g = TorusGrid(2, args.n)
    part = make_partition(g)
    # keep eps well above the grid spacing and below the largest admissible value
    ladder = 0.78 * 2.0 ** (-np.arange(0, 4.01, 0.5))
    ladder = ladder[ladder >= 4 * g.spacing]
    print(f"n={args.n}  eps {ladder[-1]:.4f}..{ladder[0]:.4f}  ({ladder.size} values)")
    print(f"{'alpha':>8} {'slope':>8} {'residual':>9}")
    for alpha in args.alpha:
        v, cert = lacunary_field(g, [1.0] * (part.j_resolved + 1), alpha, 2.0, seed=args.seed)
        r = mollification_rates(v, BesovSpec(alpha, 2.0), ladder, certificate=cert)
        print(f"{alpha:8.4f} {r['difference_slope']:8.4f} {r['planted_residual']:+9.4f}")


if __name__ == "__main__":
    main()
