"""Gaussian multiresolution basis: parameters, sparse expansions, projection.

The scaling function is phi(x) = sqrt(alpha/pi) exp(-alpha x^2) and the basis
functions are phi_jk(x) = 2^(j/2) phi(2^j x - k).  An expansion stores, for
each scale j, a contiguous run of shifts k0..k0+n-1 with their weights.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from types import MappingProxyType
from typing import Iterable, Mapping

import numpy as np

from .errors import ParameterError, ScaleOverflowError
from .special import EPS, epsilon_of_alpha

# exp(-x) underflows to zero in double precision beyond this argument, so
# skipping such terms in a sum is exact.
UNDERFLOW_ARG = 745.2


@dataclass(frozen=True)
class GmraParams:
    alpha: float = 0.25
    j_min: int = -40
    j_max: int = 100
    drop_threshold: float = 0.0

    def __post_init__(self):
        if not 0 < self.alpha <= 0.5:
            raise ParameterError(f"alpha must lie in (0, 0.5], got {self.alpha!r}")
        if self.j_min > self.j_max:
            raise ParameterError(f"empty scale window [{self.j_min}, {self.j_max}]")
        if not 0 <= self.drop_threshold < 1:
            raise ParameterError("drop_threshold must lie in [0, 1)")

    @property
    def epsilon(self) -> float:
        return epsilon_of_alpha(self.alpha)

    @property
    def phi_norm(self) -> float:
        return math.sqrt(self.alpha / math.pi)


def _freeze(a):
    a = np.array(a, dtype=float)
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class GmraExpansion:
    """Sum over stored (j, k, w) of w * phi_jk(t).

    `scales` maps j -> (k0, weights) where weights[i] belongs to shift k0 + i.
    Zero weights inside a run are padding, not coefficients.
    """

    params: GmraParams
    scales: Mapping[int, tuple[int, np.ndarray]] = field(default_factory=dict)
    metadata: str = ""
    heavy_tailed: bool = False

    def __post_init__(self):
        clean = {}
        for j, (k0, w) in sorted(self.scales.items()):
            j = int(j)
            if not self.params.j_min <= j <= self.params.j_max:
                raise ScaleOverflowError(j, self.params.j_min, self.params.j_max)
            k0, w = _trim(int(k0), np.asarray(w, dtype=float))
            if w.size:
                clean[j] = (k0, _freeze(w))
        object.__setattr__(self, "scales", MappingProxyType(clean))

    @classmethod
    def from_coefficients(cls, params, coeffs: Iterable[tuple[int, int, float]], **kw):
        acc = ScaleAccumulator()
        seen = set()
        for j, k, w in coeffs:
            if (j, k) in seen:
                raise ParameterError(f"duplicate coefficient at (j={j}, k={k})")
            seen.add((j, k))
            acc.add(int(j), int(k), np.array([w], dtype=float))
        return cls(params, acc.scales, **kw)

    def coefficients(self):
        """Iterate over nonzero (j, k, w) triples in scale, shift order."""
        for j, (k0, w) in self.scales.items():
            for i in np.flatnonzero(w):
                yield j, k0 + int(i), float(w[i])

    @property
    def n_coeffs(self) -> int:
        return sum(int(np.count_nonzero(w)) for _, w in self.scales.values())

    def scale_counts(self) -> dict[int, int]:
        return {j: int(np.count_nonzero(w)) for j, (_, w) in self.scales.items()}

    def max_abs_weight(self) -> float:
        return max((float(np.max(np.abs(w))) for _, w in self.scales.values()), default=0.0)

    def __call__(self, t):
        return eval_expansion(self, t)

    def __add__(self, other: "GmraExpansion") -> "GmraExpansion":
        if other.params.alpha != self.params.alpha:
            raise ParameterError("cannot merge expansions with different alpha")
        acc = ScaleAccumulator(self.scales)
        for j, (k0, w) in other.scales.items():
            acc.add(j, k0, w)
        return GmraExpansion(
            self.params, acc.scales, self.metadata, self.heavy_tailed or other.heavy_tailed
        )

    def scaled(self, factor: float) -> "GmraExpansion":
        return GmraExpansion(
            self.params,
            {j: (k0, factor * w) for j, (k0, w) in self.scales.items()},
            self.metadata,
            self.heavy_tailed,
        )

    def support(self, width: float = 10.0) -> tuple[float, float]:
        """Smallest interval holding every stored Gaussian's center +- `width` std devs."""
        if not self.scales:
            return (0.0, 0.0)
        sd = 1.0 / math.sqrt(2.0 * self.params.alpha)
        lo, hi = math.inf, -math.inf
        for j, (k0, w) in self.scales.items():
            nz = np.flatnonzero(w)
            h = 2.0**-j
            lo = min(lo, (k0 + nz[0] - width * sd) * h)
            hi = max(hi, (k0 + nz[-1] + width * sd) * h)
        return lo, hi


def _trim(k0, w):
    nz = np.flatnonzero(w)
    if nz.size == 0:
        return k0, w[:0]
    return k0 + int(nz[0]), w[nz[0] : nz[-1] + 1]


class ScaleAccumulator:
    """Mutable per-scale sum of contiguous coefficient runs."""

    def __init__(self, scales: Mapping[int, tuple[int, np.ndarray]] | None = None):
        self.scales: dict[int, tuple[int, np.ndarray]] = {}
        for j, (k0, w) in (scales or {}).items():
            self.scales[j] = (k0, np.array(w, dtype=float))

    def add(self, j: int, k0: int, w: np.ndarray):
        w = np.asarray(w, dtype=float)
        if w.size == 0:
            return
        if j not in self.scales:
            self.scales[j] = (k0, w.copy())
            return
        c0, cur = self.scales[j]
        lo = min(c0, k0)
        hi = max(c0 + cur.size, k0 + w.size)
        if lo != c0 or hi != c0 + cur.size:
            grown = np.zeros(hi - lo)
            grown[c0 - lo : c0 - lo + cur.size] = cur
            cur = grown
            c0 = lo
        cur[k0 - c0 : k0 - c0 + w.size] += w
        self.scales[j] = (c0, cur)


@dataclass(frozen=True)
class ProjectedGaussian:
    scale: int
    k0: int
    coeffs: np.ndarray

    @property
    def shifts(self) -> np.ndarray:
        return np.arange(self.k0, self.k0 + self.coeffs.size)


def scale_for_exponent(beta: float, params: GmraParams) -> int:
    """The unique j with 4^(j-2) alpha < beta <= 4^(j-1) alpha."""
    if not beta > 0:
        raise ParameterError(f"exponent must be positive, got {beta!r}")
    alpha = params.alpha
    j = math.ceil(math.log(beta / alpha, 4)) + 1
    # guard against rounding in the logarithm
    while beta > 4.0 ** (j - 1) * alpha:
        j += 1
    while beta <= 4.0 ** (j - 2) * alpha:
        j -= 1
    return j


def project_gaussian(
    beta: float, s: float, params: GmraParams, rel_cutoff: float = EPS
) -> ProjectedGaussian:
    """Coefficients g_k of exp(-beta (x - s)^2) on scale j = scale_for_exponent(beta).

    g_k = 2^(-j/2) sqrt(alpha / (alpha - b)) exp(-(alpha b / (alpha - b)) (k - 2^j s)^2)
    with b = 4^(-j) beta.  Untruncated, the relative error is at most
    epsilon(alpha) everywhere; keeping only g_k >= rel_cutoff * max g preserves
    that bound wherever the Gaussian itself exceeds about rel_cutoff.
    """
    j = scale_for_exponent(beta, params)
    if not params.j_min <= j <= params.j_max:
        raise ScaleOverflowError(j, params.j_min, params.j_max)
    alpha = params.alpha
    b = beta * 4.0**-j
    expo = alpha * b / (alpha - b)
    center = s * 2.0**j
    half = math.sqrt(-math.log(rel_cutoff) / expo)
    k0 = math.ceil(center - half)
    k = np.arange(k0, math.floor(center + half) + 1)
    # (k - center) via the integer part first keeps precision for large shifts
    d = (k - k0) - (center - k0)
    g = 2.0 ** (-j / 2) * math.sqrt(alpha / (alpha - b)) * np.exp(-expo * d * d)
    return ProjectedGaussian(j, int(k0), _freeze(g))


def expansion_from_gaussians(terms, params: GmraParams, metadata: str = "") -> GmraExpansion:
    """Project sum_i c_i exp(-beta_i (x - s_i)^2) term by term onto the basis."""
    acc = ScaleAccumulator()
    for c, beta, s in terms:
        pg = project_gaussian(beta, s, params)
        acc.add(pg.scale, pg.k0, c * pg.coeffs)
    return GmraExpansion(params, acc.scales, metadata)


def two_scale_coeffs(params: GmraParams, rel_cutoff: float = EPS) -> np.ndarray:
    """h_k = sqrt(4 alpha / 3 pi) exp(-alpha k^2 / 3), k = -K..K (center index K)."""
    alpha = params.alpha
    kmax = math.floor(math.sqrt(-3.0 * math.log(rel_cutoff) / alpha))
    k = np.arange(-kmax, kmax + 1)
    return math.sqrt(4 * alpha / (3 * math.pi)) * np.exp(-alpha * k * k / 3.0)


def eval_expansion(e: GmraExpansion, t):
    """Evaluate the expansion at scalar or array t."""
    t_arr = np.asarray(t, dtype=float)
    flat = t_arr.ravel()
    out = np.zeros(flat.size)
    alpha = e.params.alpha
    reach = math.sqrt(UNDERFLOW_ARG / alpha)
    span = math.ceil(reach) + 1
    for j, (k0, w) in e.scales.items():
        z = flat * 2.0**j
        n = w.size
        sel = np.flatnonzero((z > k0 - reach) & (z < k0 + n - 1 + reach))
        if sel.size == 0:
            continue
        zs = z[sel]
        if n <= 2 * span + 1:
            d = zs[:, None] - (k0 + np.arange(n))
            vals = np.exp(-alpha * d * d) @ w
        else:
            padded = np.concatenate([np.zeros(span + 1), w, np.zeros(span + 1)])
            base = np.floor(zs).astype(np.int64) - span
            cols = np.arange(2 * span + 1)
            kk = base[:, None] + cols
            idx = np.clip(kk - k0 + span + 1, 0, padded.size - 1)
            d = zs[:, None] - kk
            vals = np.einsum("ij,ij->i", np.exp(-alpha * d * d), padded[idx])
        out[sel] += 2.0 ** (j / 2) * vals
    out *= e.params.phi_norm
    if t_arr.ndim == 0:
        return float(out[0])
    return out.reshape(t_arr.shape)


def compress(e: GmraExpansion, rel_threshold: float) -> GmraExpansion:
    """Zero out weights below rel_threshold times the largest |weight|."""
    if not 0 <= rel_threshold < 1:
        raise ParameterError("rel_threshold must lie in [0, 1)")
    if rel_threshold == 0 or not e.scales:
        return e
    cut = rel_threshold * e.max_abs_weight()
    scales = {j: (k0, np.where(np.abs(w) < cut, 0.0, w)) for j, (k0, w) in e.scales.items()}
    return GmraExpansion(e.params, scales, e.metadata, e.heavy_tailed)


# -- serialization ---------------------------------------------------------

def _fmt(x: float) -> str:
    return format(float(x), ".17g")


def expansion_to_dict(e: GmraExpansion) -> dict:
    p = e.params
    return {
        "kind": "gmra_expansion",
        "alpha": _fmt(p.alpha),
        "epsilon": _fmt(p.epsilon),
        "j_min": p.j_min,
        "j_max": p.j_max,
        "drop_threshold": _fmt(p.drop_threshold),
        "heavy_tailed": e.heavy_tailed,
        "metadata": e.metadata,
        "coeffs": [[j, k, _fmt(w)] for j, k, w in e.coefficients()],
    }


def expansion_from_dict(d: dict) -> GmraExpansion:
    params = GmraParams(
        alpha=float(d["alpha"]),
        j_min=int(d["j_min"]),
        j_max=int(d["j_max"]),
        drop_threshold=float(d.get("drop_threshold", 0.0)),
    )
    return GmraExpansion.from_coefficients(
        params,
        ((int(j), int(k), float(w)) for j, k, w in d["coeffs"]),
        metadata=d.get("metadata", ""),
        heavy_tailed=bool(d.get("heavy_tailed", False)),
    )


def dumps_expansion(e: GmraExpansion) -> str:
    return json.dumps(expansion_to_dict(e), indent=1)


def loads_expansion(text: str) -> GmraExpansion:
    return expansion_from_dict(json.loads(text))


def dumps_expansion_text(e: GmraExpansion) -> str:
    """Line format: a header record, then one `j k w` record per coefficient."""
    p = e.params
    lines = [
        f"# gmra alpha={_fmt(p.alpha)} epsilon={_fmt(p.epsilon)} "
        f"j_min={p.j_min} j_max={p.j_max} drop_threshold={_fmt(p.drop_threshold)} "
        f"heavy_tailed={int(e.heavy_tailed)}"
    ]
    if e.metadata:
        lines.append(f"# metadata {e.metadata}")
    lines.extend(f"{j} {k} {_fmt(w)}" for j, k, w in e.coefficients())
    return "\n".join(lines) + "\n"


def loads_expansion_text(text: str) -> GmraExpansion:
    header = {}
    metadata = ""
    coeffs = []
    for line in text.splitlines():
        if line.startswith("# gmra"):
            header = dict(item.split("=") for item in line.split()[2:])
        elif line.startswith("# metadata "):
            metadata = line[len("# metadata ") :]
        elif line.strip():
            j, k, w = line.split()
            coeffs.append((int(j), int(k), float(w)))
    if not header:
        raise ParameterError("missing gmra header record")
    params = GmraParams(
        alpha=float(header["alpha"]),
        j_min=int(header["j_min"]),
        j_max=int(header["j_max"]),
        drop_threshold=float(header.get("drop_threshold", 0.0)),
    )
    return GmraExpansion.from_coefficients(
        params, coeffs, metadata=metadata, heavy_tailed=header.get("heavy_tailed") == "1"
    )
