"""Conservation drift and the low-pass energy budget for a 2D run at two time steps.

    python scripts/solver_budgets.py --n 128 --T 0.5 --dt 0.004
"""

import argparse

from besovflux.grid import TorusGrid
from besovflux.fields import random_smooth_field
from besovflux.verify import BUDGET_SCALES, lp_budget_residuals


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--n", type=int, default=128)
    ap.add_argument("--T", type=float, default=0.5)
    ap.add_argument("--dt", type=float, default=0.004)
    ap.add_argument("--seed", type=int, default=7)
    args = ap.parse_args()

    v0 = random_smooth_field(TorusGrid(2, args.n), 3.0, seed=args.seed)
    runs = {dt: lp_budget_residuals(v0, args.T, dt) for dt in (args.dt, args.dt / 2)}
    for dt, (traj, res) in runs.items():
        print(
            f"dt={dt:.4g}  energy drift {traj.relative_drift('energy'):.3e}"
            f"  enstrophy drift {traj.relative_drift('second'):.3e}"
        )
        for N in BUDGET_SCALES:
            print(f"    N={N}  budget residual {res[N]:+.3e}")


if __name__ == "__main__":
    main()
