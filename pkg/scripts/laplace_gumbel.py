"""Density of Z = X Y for X ~ Laplace(3, 1), Y ~ Gumbel(2, 3) and its moment check."""

import argparse
import time

from gmra import GmraParams, Gumbel, Laplace, product
from gmra.core import dumps_expansion
from gmra.stats import moment


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--out", default=None, help="write the expansion as JSON")
    ap.add_argument("--threads", type=int, default=None)
    args = ap.parse_args(argv)

    x, y = Laplace(3, 1), Gumbel(2, 3)
    start = time.perf_counter()
    e = product(x, y, GmraParams(), workers=args.threads)
    wall = time.perf_counter() - start
    exact = [1.0, x.mean() * y.mean(), (x.var() + x.mean() ** 2) * (y.var() + y.mean() ** 2)]
    print(f"{e.n_coeffs} coefficients on {len(e.scales)} scales in {wall:.2f} s")
    for n, ref in enumerate(exact):
        m = moment(e, n)
        print(f"M{n} {m:.15g}  exact {ref:.15g}  diff {m - ref:.2e}")
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(dumps_expansion(e))


if __name__ == "__main__":
    main()
