"""Build entropy certificates on full shifts and report where the pipeline stops.

    python3 scripts/certificate_demo.py --length 6 8 --words 2 3 4
"""

import argparse
import json
import time

from uentropy.shadowing import CertificateError, entropy_certificate
from uentropy.systems import contraction, default_base, full_shift


def run(sys, n, seed=0):
    start = time.perf_counter()
    try:
        cert = entropy_certificate(sys, default_base(sys), n, seed=seed)
    except CertificateError as exc:
        return {"system": sys.describe(), "n": n, "status": f"stopped at {exc.stage}",
                "reason": str(exc), "seconds": round(time.perf_counter() - start, 2)}
    return {"system": sys.describe(), "n": n, "status": "verified" if cert.verified else "sampled",
            "l": cert.l, "k": cert.k, "shadows": len(cert.shadows), "bound": cert.bound,
            "scales": cert.scales, "seconds": round(time.perf_counter() - start, 2)}


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--length", type=int, nargs="+", default=[6, 8])
    ap.add_argument("--words", type=int, nargs="+", default=[2, 3, 4])
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()
    for L in args.length:
        for n in args.words:
            print(json.dumps(run(full_shift(2, L), n, args.seed), sort_keys=True))
    print(json.dumps(run(contraction(8), 3, args.seed), sort_keys=True))


if __name__ == "__main__":
    main()
