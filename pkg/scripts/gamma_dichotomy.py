"""Gamma-kernel bound for constant versus decaying block sequences.

    python scripts/gamma_dichotomy.py --length 240 --p 3
"""

import argparse

import numpy as np

from besovflux.flux import GammaKernel, gamma_bound
from besovflux.scaling import loglog_fit


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--length", type=int, default=240)
    ap.add_argument("--p", type=float, default=3.0)
    ap.add_argument("--rate", type=float, default=1 / 8, help="decaying sequence 2^{-rate j}")
    args = ap.parse_args()

    alpha, theta = 2.0 / args.p, args.p - 1.0
    j = np.arange(-1, args.length - 1)
    scales = np.arange(args.length // 4, 3 * args.length // 4 + 1)
    const = [gamma_bound(np.ones(args.length), None, alpha, None, theta, int(N)).value for N in scales]
    decay = [gamma_bound(2.0 ** (-args.rate * j), None, alpha, None, theta, int(N)).value for N in scales]
    exact = GammaKernel(alpha).l1_norm() ** (theta + 1)
    print(f"constant: min {min(const):.6g}  max {max(const):.6g}  l1 prediction {exact:.6g}")
    print(f"decaying: slope in 2^N {loglog_fit(2.0**scales, decay).slope:.4f}")


if __name__ == "__main__":
    main()
