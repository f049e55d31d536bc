"""Run the acceptance battery (or a subset) and print one line per criterion.

    python scripts/run_acceptance.py --only 1 4 8
"""

import argparse
import sys

from besovflux.verify import run_battery, summarize


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--only", type=int, nargs="*")
    args = ap.parse_args()
    s = summarize(run_battery(args.only, echo=print))
    print(f"{s['passed']}/{s['total']} checks passed")
    return 0 if not s["failed"] else 1


if __name__ == "__main__":
    sys.exit(main())
