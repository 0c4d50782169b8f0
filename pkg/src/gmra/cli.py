"""Command-line front end: products, fits, evaluation, moments, Monte-Carlo checks."""

from __future__ import annotations

import argparse
import csv
import json
import math
import re
import sys
import time
from pathlib import Path

import numpy as np

from .core import GmraExpansion, GmraParams, dumps_expansion, dumps_expansion_text, loads_expansion, loads_expansion_text
from .distributions import Cauchy, Expansion, Gumbel, Laplace, Mixture, Normal
from .errors import GmraError
from .filters import filter_M0_exact, filter_M00, filter_M_exact, filter_Ma, filter_m0
from .mixture import dumps_mixture, fit_distribution, fit_laplace_unit, mixture_from_dict
from .product import product, thread_count
from .special import bessel_k0_array
from .stats import cdf, moment

FAMILIES = {"normal": Normal, "laplace": Laplace, "gumbel": Gumbel, "cauchy": Cauchy}
_SPEC = re.compile(r"^\s*([a-z]+)\s*\(\s*([^()]*)\)\s*$")


class UsageError(Exception):
    pass


def load_file(path: str):
    """Expansion or mixture stored by this tool (JSON or the line format)."""
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise UsageError(f"cannot read {path}: {exc.strerror}") from exc
    if text.lstrip().startswith("# gmra"):
        return loads_expansion_text(text)
    try:
        d = json.loads(text)
    except json.JSONDecodeError as exc:
        raise UsageError(f"{path}: not a stored expansion or mixture") from exc
    if d.get("kind") == "gaussian_mixture":
        return mixture_from_dict(d)
    return loads_expansion(text)


def parse_spec(text: str):
    """normal(mu,sigma) | laplace(mu,b) | gumbel(mu,sigma) | cauchy(x0,gamma) | file:PATH."""
    if text.startswith("file:"):
        obj = load_file(text[5:])
        return Expansion(obj) if isinstance(obj, GmraExpansion) else Mixture(obj)
    m = _SPEC.match(text)
    if not m or m.group(1) not in FAMILIES:
        raise UsageError(f"cannot parse distribution {text!r}")
    try:
        args = [float(a) for a in m.group(2).split(",")]
    except ValueError as exc:
        raise UsageError(f"non-numeric parameter in {text!r}") from exc
    if len(args) != 2:
        raise UsageError(f"{m.group(1)} takes two parameters, got {len(args)}")
    return FAMILIES[m.group(1)](*args)


def _params(args) -> GmraParams:
    return GmraParams(alpha=args.alpha, j_min=args.jmin, j_max=args.jmax)


def _write_expansion(e: GmraExpansion, path: str):
    text = dumps_expansion_text(e) if path.endswith(".txt") else dumps_expansion(e)
    Path(path).write_text(text)


def _load_expansion(path: str) -> GmraExpansion:
    obj = load_file(path)
    if not isinstance(obj, GmraExpansion):
        raise UsageError(f"{path} holds a mixture, not an expansion")
    return obj


def _csv_writer(path):
    fh = open(path, "w", newline="") if path and path != "-" else sys.stdout
    return fh, csv.writer(fh, lineterminator="\n")


def _fmt(x) -> str:
    return format(float(x), ".17g")


def cmd_product(args) -> int:
    x, y = parse_spec(args.x), parse_spec(args.y)
    params = _params(args)
    start = time.perf_counter()
    e = product(x, y, params, workers=args.threads)
    wall = time.perf_counter() - start
    _write_expansion(e, args.out)
    print(f"epsilon {params.epsilon:.6e}")
    print("coefficients per scale:")
    for j, n in sorted(e.scale_counts().items()):
        print(f"  j={j:4d}  {n}")
    print(f"total coefficients {e.n_coeffs}")
    print(f"M0 {moment(e, 0):.17g}")
    if not e.heavy_tailed:
        m1, m2 = moment(e, 1), moment(e, 2)
        print(f"M1 {m1:.17g}")
        print(f"M2 {m2:.17g}")
        print(f"variance {m2 - m1 * m1:.17g}")
    print(f"wall time {wall:.3f} s")
    print(f"wrote {args.out}")
    return 0


def cmd_fit(args) -> int:
    spec = parse_spec(args.spec)
    if isinstance(spec, Laplace) and args.interval is None and not args.sampled:
        mix = fit_laplace_unit().rescale(spec.mu, spec.b)
    else:
        mix = fit_distribution(spec, args.interval, args.n, args.alpha)
    Path(args.out).write_text(dumps_mixture(mix))
    lo, hi = args.interval or (spec.mean() - 20 * math.sqrt(spec.var()), spec.mean() + 20 * math.sqrt(spec.var()))
    grid = np.linspace(lo, hi, 10_001)
    err = float(np.max(np.abs(mix(grid) - spec.pdf(grid))))
    print(f"terms {len(mix)}")
    print(f"mass {mix.mass():.17g}")
    print(f"max abs error on [{lo:g}, {hi:g}] {err:.3e}")
    print(f"wrote {args.out}")
    return 0


def _grid(args) -> np.ndarray:
    if args.num < 0:
        raise UsageError("--num must be nonnegative")
    if args.grid == "log":
        return 10.0 ** np.linspace(args.start, args.stop, args.num)
    return np.linspace(args.start, args.stop, args.num)


def cmd_eval(args) -> int:
    if args.reference == "k0" and args.cdf:
        raise UsageError("--reference k0 applies to densities, not --cdf")
    e = _load_expansion(args.file)
    t = _grid(args)
    vals = cdf(e, t) if args.cdf else e(t)
    header = ["t", "cdf" if args.cdf else "p"]
    ref = None
    if args.reference == "k0":
        ref = bessel_k0_array(np.abs(t)) / math.pi if t.size else np.zeros(0)
        header += ["reference", "rel_error"]
    fh, w = _csv_writer(args.out)
    try:
        w.writerow(header)
        for i in range(t.size):
            row = [_fmt(t[i]), _fmt(vals[i])]
            if ref is not None:
                row += [_fmt(ref[i]), _fmt(abs(vals[i] / ref[i] - 1))]
            w.writerow(row)
    finally:
        if fh is not sys.stdout:
            fh.close()
    return 0


def cmd_moments(args) -> int:
    e = _load_expansion(args.file)
    top = 0 if e.heavy_tailed else args.max_order
    for n in range(top + 1):
        print(f"M{n} {moment(e, n):.17g}")
    if e.heavy_tailed:
        print("heavy-tailed density: moments of order >= 1 do not exist")
    else:
        m1, m2 = moment(e, 1), moment(e, 2)
        print(f"mean {m1:.17g}")
        print(f"variance {m2 - m1 * m1:.17g}")
    return 0


def cmd_mc_compare(args) -> int:
    if args.samples <= 0:
        raise UsageError("--samples must be positive")
    if args.bins <= 0:
        raise UsageError("--bins must be positive")
    x, y = parse_spec(args.x), parse_spec(args.y)
    rng = np.random.default_rng(args.seed)
    z = x.sample(rng, args.samples) * y.sample(rng, args.samples)
    lo, hi = args.range if args.range else np.quantile(z, [0.001, 0.999])
    edges = np.linspace(lo, hi, args.bins + 1)
    width = edges[1] - edges[0]
    counts, _ = np.histogram(z, edges)
    mc = counts / (args.samples * width)
    e = product(x, y, _params(args), workers=args.threads)
    gm = np.diff(cdf(e, edges)) / width
    diff = mc - gm
    # binomial standard deviation of each bin's density estimate
    sd = np.sqrt(np.maximum(gm * width, 1.0 / args.samples) * args.samples) / (args.samples * width)
    fh, w = _csv_writer(args.out)
    try:
        w.writerow(["bin_center", "mc_density", "gmra_density", "difference"])
        for c, a, b, d in zip(0.5 * (edges[1:] + edges[:-1]), mc, gm, diff):
            w.writerow([_fmt(c), _fmt(a), _fmt(b), _fmt(d)])
    finally:
        if fh is not sys.stdout:
            fh.close()
    per_bin = args.samples / args.bins
    print(f"max |difference| {np.max(np.abs(diff)):.3e}", file=sys.stderr)
    print(f"max |difference| / bin std dev {np.max(np.abs(diff) / sd):.3f}", file=sys.stderr)
    print(f"expected relative MC scale ~ 1/sqrt(samples per bin) = {1 / math.sqrt(per_bin):.3e}", file=sys.stderr)
    return 0


def cmd_filters_check(args) -> int:
    p = np.linspace(-0.5, 0.5, args.num)
    a = args.alpha
    cols = [filter_m0(p, a), filter_Ma(p, a), filter_M00(p, a), filter_M0_exact(p, a), filter_M_exact(p, a)]
    fh, w = _csv_writer(args.out)
    try:
        w.writerow(["p", "m0", "Ma", "M00", "M0", "M_exact"])
        for i in range(p.size):
            w.writerow([_fmt(p[i])] + [_fmt(c[i]) for c in cols])
    finally:
        if fh is not sys.stdout:
            fh.close()
    return 0


def _add_window(p):
    p.add_argument("--alpha", type=float, default=0.25)
    p.add_argument("--jmin", type=int, default=-40)
    p.add_argument("--jmax", type=int, default=100)
    p.add_argument("--threads", type=int, default=None, help="worker threads (default: GMRA_THREADS)")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="gmra", description="Densities of products of random variables")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("product", help="compute the density of X*Y")
    p.add_argument("x")
    p.add_argument("y")
    _add_window(p)
    p.add_argument("--out", default="product.json")
    p.set_defaults(func=cmd_product)

    p = sub.add_parser("fit", help="fit a Gaussian mixture to a density")
    p.add_argument("spec")
    p.add_argument("--n", type=int, default=300)
    p.add_argument("--alpha", type=float, default=0.25)
    p.add_argument("--interval", type=float, nargs=2, default=None)
    p.add_argument("--sampled", action="store_true", help="use the sampled fit even for Laplace")
    p.add_argument("--out", default="mixture.json")
    p.set_defaults(func=cmd_fit)

    p = sub.add_parser("eval", help="evaluate a stored expansion on a grid")
    p.add_argument("file")
    p.add_argument("--grid", choices=("linear", "log"), default="linear")
    p.add_argument("--start", type=float, default=-5.0)
    p.add_argument("--stop", type=float, default=5.0)
    p.add_argument("--num", type=int, default=1001)
    p.add_argument("--cdf", action="store_true")
    p.add_argument("--reference", choices=("k0",), default=None)
    p.add_argument("--out", default="-")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("moments", help="raw moments of a stored expansion")
    p.add_argument("file")
    p.add_argument("--max-order", type=int, default=4)
    p.set_defaults(func=cmd_moments)

    p = sub.add_parser("mc-compare", help="compare against a Monte-Carlo histogram")
    p.add_argument("x")
    p.add_argument("y")
    _add_window(p)
    p.add_argument("--samples", type=int, default=1_000_000)
    p.add_argument("--bins", type=int, default=1000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--range", type=float, nargs=2, default=None)
    p.add_argument("--out", default="-")
    p.set_defaults(func=cmd_mc_compare)

    p = sub.add_parser("filters-check", help="tabulate the two-scale filters")
    p.add_argument("--alpha", type=float, default=0.25)
    p.add_argument("--num", type=int, default=1001)
    p.add_argument("--out", default="-")
    p.set_defaults(func=cmd_filters_check)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if getattr(args, "threads", None) is not None:
            thread_count(args.threads)
        return args.func(args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (GmraError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
