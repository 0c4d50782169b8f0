"""Monte-Carlo histogram of X Y against the expansion, for a few factor pairs."""

import argparse

from gmra.cli import main as cli

PAIRS = [
    ("normal(0,1)", "normal(0,1)"),
    ("normal(6,1)", "normal(2,1)"),
    ("laplace(3,1)", "gumbel(2,3)"),
]


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--samples", type=int, default=1_000_000)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--prefix", default="mc")
    args = ap.parse_args(argv)
    for i, (x, y) in enumerate(PAIRS):
        print(f"{x} x {y}", flush=True)
        out = f"{args.prefix}_{i}.csv"
        cli(["mc-compare", x, y, "--samples", str(args.samples), "--seed", str(args.seed), "--out", out])


if __name__ == "__main__":
    main()
