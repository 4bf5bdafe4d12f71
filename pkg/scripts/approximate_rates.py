"""Greedy-net entropy estimates on carriers too large for exact counts.

    python3 scripts/approximate_rates.py
"""

import argparse
import math
import time
from fractions import Fraction

from uentropy.spanning import net_entropy
from uentropy.systems import cat, doubling

RUNS = [
    ("doubling", lambda: doubling(4096), [Fraction(1, 2), Fraction(1, 4)], 12, math.log(2)),
    ("cat", lambda: cat(128), [Fraction(1, 2), Fraction(1, 4), Fraction(1, 8)], 6,
     math.log((3 + math.sqrt(5)) / 2)),
]


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--only", choices=[r[0] for r in RUNS])
    args = ap.parse_args()
    for name, build, grid, n_max, target in RUNS:
        if args.only and name != args.only:
            continue
        start = time.perf_counter()
        s = build()
        est = net_entropy(s, grid, n_max)
        print(f"{s.describe()}: rate {est.fitted_rate:.4f} (target {target:.4f}) "
              f"at {est.scale}, window {est.fit_window}, "
              f"{time.perf_counter() - start:.1f}s")
        for scale in est.per_scale:
            print(f"  {scale}: {est.series(scale)}")


if __name__ == "__main__":
    main()
