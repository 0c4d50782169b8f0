"""Relative error of the two-normal product against K0(|t|)/pi for several alpha.

Writes one CSV column per alpha over t = 10^x, x in [-27, 0].
"""

import argparse
import csv
import sys

import numpy as np

from gmra import GmraParams, Normal, product
from gmra.special import bessel_k0_array


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--alphas", type=float, nargs="+", default=[0.25, 0.3, 0.35, 0.4])
    ap.add_argument("--num", type=int, default=200)
    ap.add_argument("--out", default="-")
    args = ap.parse_args(argv)

    t = np.logspace(-27, 0, args.num)
    ref = bessel_k0_array(t) / np.pi
    cols = []
    for a in args.alphas:
        e = product(Normal(0, 1), Normal(0, 1), GmraParams(alpha=a))
        err = np.abs(e(t) / ref - 1)
        print(f"alpha={a:g}: max relative error {err.max():.3e}", file=sys.stderr)
        cols.append(err)

    fh = open(args.out, "w", newline="") if args.out != "-" else sys.stdout
    w = csv.writer(fh, lineterminator="\n")
    w.writerow(["t"] + [f"alpha={a:g}" for a in args.alphas])
    for i in range(t.size):
        w.writerow([format(t[i], ".17g")] + [format(c[i], ".17g") for c in cols])
    if fh is not sys.stdout:
        fh.close()


if __name__ == "__main__":
    main()
