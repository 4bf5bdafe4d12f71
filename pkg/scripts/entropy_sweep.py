"""Uniform entropy of small zoo systems, three ways, as one CSV.

    python3 scripts/entropy_sweep.py --out sweep.csv
"""

import argparse
import math
import time

from uentropy.covers import uniform_cover_entropy
from uentropy.reports import format_csv
from uentropy.spanning import uniform_entropy
from uentropy.systems import (cat, contraction, default_base, full_shift, identity,
                              rotation, tent)

SYSTEMS = [full_shift(2, 8), full_shift(3, 5), rotation(32, 5), contraction(10), identity(8),
           tent(33), cat(8)]
COLUMNS = ("system", "h_sep", "h_span", "h_uc", "exact", "expected", "seconds")
EXPECTED = {"full_shift": lambda p: math.log(p[0]), "rotation": lambda p: 0.0,
            "contraction": lambda p: 0.0, "identity": lambda p: 0.0,
            "tent": lambda p: math.log(2),
            "cat": lambda p: math.log((3 + math.sqrt(5)) / 2)}


def sweep(n_max=None, max_scales=8):
    rows = []
    for s in SYSTEMS:
        start = time.perf_counter()
        base = default_base(s, max_scales=max_scales)
        nm = n_max
        if nm is None and s.name == "full_shift":
            nm = s.params[1]        # counts saturate past the word length
        ue = uniform_entropy(s, base, n_max=nm, mode="auto")
        huc = uniform_cover_entropy(s, base, n_max=nm, mode="auto")
        rows.append(dict(system=s.describe(), h_sep=ue.separated.fitted_rate,
                         h_span=ue.spanning.fitted_rate, h_uc=huc.fitted_rate,
                         exact=ue.exact and huc.exact,
                         expected=EXPECTED[s.name](s.params),
                         seconds=round(time.perf_counter() - start, 2)))
    return rows


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--out", default=None, help="CSV path (default: stdout)")
    ap.add_argument("--nmax", type=int, default=None)
    args = ap.parse_args()
    text = format_csv(sweep(args.nmax), COLUMNS)
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text)
    else:
        print(text, end="")


if __name__ == "__main__":
    main()
