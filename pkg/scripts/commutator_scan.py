"""eps-scan of the tensor commutator norm at the critical exponents theta = p - 1, alpha = 1/p.

    python scripts/commutator_scan.py --n 256 --p 2 3
"""

import argparse

from besovflux.dyadic import make_partition
from besovflux.fields import lacunary_field
from besovflux.grid import TorusGrid
from besovflux.mollify import commutator_scan, default_ladder


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--n", type=int, default=256)
    ap.add_argument("--p", type=float, nargs="+", default=[2.0, 3.0])
    ap.add_argument("--seed", type=int, default=5)
    args = ap.parse_args()

    g = TorusGrid(2, args.n)
    part = make_partition(g)
    eps = default_ladder(g)
    for p in args.p:
        theta, q, alpha = p - 1.0, 2.0 * p / (p - 1), 1.0 / p
        v, _ = lacunary_field(g, [1.0] * (part.j_resolved + 1), alpha, q, seed=args.seed)
        r = commutator_scan(v, eps, theta, p, q, alpha=alpha)
        print(f"p={p:g}  slope {r['slope']:.4f}  (theta*alpha = {theta * alpha:.4f})")
        for e, val in zip(r["eps"], r["values"]):
            print(f"    eps={e:.4f}  norm={val:.6e}")


if __name__ == "__main__":
    main()
