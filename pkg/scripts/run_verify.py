"""Run the oracle and limit checks and print one line per check.

    python3 scripts/run_verify.py [--quick] [--scale 1.0]
"""

import argparse
import sys
import time

from gravmeasure.checks import run_checks


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--quick", action="store_true")
    ap.add_argument("--scale", type=float, default=1.0)
    args = ap.parse_args()
    t0 = time.perf_counter()
    results = run_checks(scale=args.scale, quick=args.quick)
    width = max(len(r.name) for r in results)
    for r in results:
        flag = "PASS" if r.passed else "FAIL"
        print(f"{flag}  {r.name:<{width}}  {r.value:.3e} {r.relation} {r.tolerance:.3e}  {r.detail}")
    print(f"{sum(r.passed for r in results)}/{len(results)} passed in {time.perf_counter() - t0:.1f} s")
    return 0 if all(r.passed for r in results) else 1


if __name__ == "__main__":
    sys.exit(main())
