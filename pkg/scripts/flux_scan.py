"""Energy or helicity flux across dyadic scales for a lacunary field with decaying blocks.

    python scripts/flux_scan.py --dim 2 --n 128 --kind energy_LP
    python scripts/flux_scan.py --dim 3 --n 64 --kind helicity_LP --p 3
"""

import argparse

import numpy as np

from besovflux.dyadic import make_partition
from besovflux.fields import lacunary_field
from besovflux.flux import FLUX_KINDS, flux_scan
from besovflux.grid import TorusGrid
from besovflux.mollify import default_ladder


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--dim", type=int, default=2, choices=(2, 3))
    ap.add_argument("--n", type=int, default=128)
    ap.add_argument("--kind", default="energy_LP", choices=FLUX_KINDS)
    ap.add_argument("--p", type=float, default=3.0)
    ap.add_argument("--rate", type=float, default=0.25, help="planted block decay 2^{-rate j}")
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()

    g = TorusGrid(args.dim, args.n)
    part = make_partition(g)
    alpha = (2.0 if "helicity" in args.kind else 1.0) / args.p
    j = np.arange(part.j_resolved + 1)
    v, _ = lacunary_field(g, 2.0 ** (-args.rate * j), alpha, 2 * args.p / (args.p - 1), seed=args.seed)
    index = range(part.j_max + 1) if args.kind.endswith("LP") else default_ladder(g)
    series = flux_scan(v, args.kind, index)
    for i, val in zip(series.index, series.values):
        print(f"{i:>8.4g}  {val:+.6e}")
    if series.slope is not None:
        print(f"decay slope {series.slope.slope:.4f}")


if __name__ == "__main__":
    main()
