"""Gaussian mixtures: construction, evaluation and fitting to densities.

A mixture is sum_i c_i exp(-beta_i (x - s_i)^2).  Two constructions are
provided: a trapezoidal discretization of an integral representation of the
Laplace density, and a Fourier-domain fit of sampled values that uses the
interpolating combination of shifted Gaussians.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np

from .errors import ConditioningError, CoverageError, ParameterError
from .special import erfc, theta3

_CHUNK = 1 << 22


@dataclass(frozen=True)
class GaussianMixture:
    weights: np.ndarray
    exponents: np.ndarray
    centers: np.ndarray
    metadata: str = ""

    def __post_init__(self):
        arrays = []
        for name in ("weights", "exponents", "centers"):
            a = np.array(getattr(self, name), dtype=float).ravel()
            a.setflags(write=False)
            arrays.append(a)
            object.__setattr__(self, name, a)
        if not arrays[0].size == arrays[1].size == arrays[2].size:
            raise ParameterError("weights, exponents and centers must have equal length")
        if not np.all(arrays[1] > 0):
            raise ParameterError("all exponents must be positive")
        if not all(np.all(np.isfinite(a)) for a in arrays):
            raise ParameterError("mixture parameters must be finite")

    @classmethod
    def from_terms(cls, terms, metadata: str = "") -> "GaussianMixture":
        terms = list(terms)
        if not terms:
            return cls(np.zeros(0), np.zeros(0), np.zeros(0), metadata)
        c, b, s = zip(*terms)
        return cls(np.array(c), np.array(b), np.array(s), metadata)

    @property
    def terms(self):
        return list(zip(self.weights.tolist(), self.exponents.tolist(), self.centers.tolist()))

    def __len__(self):
        return self.weights.size

    def __call__(self, x):
        x_arr = np.asarray(x, dtype=float)
        flat = x_arr.ravel()
        out = np.empty(flat.size)
        step = max(1, _CHUNK // max(len(self), 1))
        for i in range(0, flat.size, step):
            d = flat[i : i + step, None] - self.centers
            out[i : i + step] = np.exp(-self.exponents * d * d) @ self.weights
        return float(out[0]) if x_arr.ndim == 0 else out.reshape(x_arr.shape)

    def term_masses(self) -> np.ndarray:
        return self.weights * np.sqrt(np.pi / self.exponents)

    def mass(self) -> float:
        return float(np.sum(self.term_masses()))

    def mean(self) -> float:
        return float(self.term_masses() @ self.centers) / self.mass()

    def var(self) -> float:
        m = self.term_masses()
        second = m @ (self.centers**2 + 0.5 / self.exponents)
        return float(second / self.mass() - self.mean() ** 2)

    def cdf(self, x):
        """Integral of the mixture from -inf to x."""
        x_arr = np.asarray(x, dtype=float)
        z = (x_arr.ravel()[:, None] - self.centers) * np.sqrt(self.exponents)
        # 0.5 erfc(-z) keeps relative accuracy in the left tail
        out = 0.5 * erfc(-z) @ self.term_masses()
        return float(out[0]) if x_arr.ndim == 0 else out.reshape(x_arr.shape)

    def rescale(self, mu: float, sigma: float) -> "GaussianMixture":
        """Mixture for the density of mu + sigma X, given this one for X."""
        if not sigma > 0:
            raise ParameterError("scale must be positive")
        return GaussianMixture(
            self.weights / sigma,
            self.exponents / sigma**2,
            mu + sigma * self.centers,
            self.metadata,
        )

    def scaled(self, factor: float) -> "GaussianMixture":
        return GaussianMixture(factor * self.weights, self.exponents, self.centers, self.metadata)


# -- Laplace -----------------------------------------------------------------

LAPLACE_TERMS = 120
LAPLACE_STEP = 5.0 / 12.0
LAPLACE_T0 = -40.0


def fit_laplace_unit() -> GaussianMixture:
    """120-term mixture for (1/2) e^{-|x|}.

    Discretizes (1/(4 sqrt(pi))) int exp(-e^t/4 - x^2 e^{-t} + t/2) dt with the
    trapezoidal rule at t_n = -40 + 5n/12.
    """
    h = LAPLACE_STEP
    t = LAPLACE_T0 + h * np.arange(LAPLACE_TERMS)
    weights = h / (4.0 * math.sqrt(math.pi)) * np.exp(-np.exp(t) / 4.0 + t / 2.0)
    return GaussianMixture(
        weights, np.exp(-t), np.zeros(LAPLACE_TERMS), metadata="laplace(0,1) trapezoid h=5/12"
    )


# -- sampled fits ----------------------------------------------------------


def interpolating_denominator(p, alpha: float):
    """sqrt(alpha/pi) theta_3(pi p, e^{-alpha}): the DFT of the sampled Gaussian."""
    return math.sqrt(alpha / math.pi) * theta3(np.pi * np.asarray(p, dtype=float), math.exp(-alpha))


def _is_smooth_235(n: int) -> bool:
    for f in (2, 3, 5):
        while n % f == 0:
            n //= f
    return n == 1


def fit_sampled(samples, alpha: float) -> np.ndarray:
    """Coefficients g with sum_k g_k sqrt(N) phi(N s - k) = samples at s = m/N (periodically)."""
    y = np.asarray(samples, dtype=float)
    n = y.size
    if n < 8:
        raise ParameterError(f"need at least 8 samples, got {n}")
    if not _is_smooth_235(n):
        raise ParameterError(f"sample count {n} must be a product of 2, 3 and 5")
    if not alpha > 0:
        raise ParameterError("alpha must be positive")
    denom = math.sqrt(n) * interpolating_denominator(np.arange(n) / n, alpha)
    g = np.fft.ifft(np.fft.fft(y) / denom)
    scale = max(float(np.max(np.abs(g.real))), np.finfo(float).tiny)
    residue = float(np.max(np.abs(g.imag)))
    if residue > 1e-10 * scale:
        raise ConditioningError(f"imaginary residue {residue:.3g} after inverse transform")
    return g.real


def mixture_from_samples(g, a: float, b: float, alpha: float, metadata: str = "") -> GaussianMixture:
    """Place coefficients fitted on [a, b] back in x coordinates."""
    n = len(g)
    length = b - a
    k = np.arange(n)
    return GaussianMixture(
        np.asarray(g) * math.sqrt(n * alpha / math.pi),
        np.full(n, alpha * (n / length) ** 2),
        a + k * length / n,
        metadata,
    )


# standard intervals with mass outside below 1e-20 of the peak density
BASE_INTERVALS = {
    "gumbel": (-6.0, 50.0),
    "normal": (-10.0, 10.0),
    "laplace": (-50.0, 50.0),
}
COVERAGE_TOL = 1e-10


def fit_on_interval(spec, interval, n: int, alpha: float) -> GaussianMixture:
    a, b = map(float, interval)
    if not a < b:
        raise ParameterError(f"empty interval [{a}, {b}]")
    outside = float(spec.cdf(a)) + float(spec.sf(b))
    if outside > COVERAGE_TOL:
        raise CoverageError(f"interval [{a}, {b}] misses mass {outside:.3g} of {spec}")
    s = np.arange(n) / n
    g = fit_sampled(spec.pdf(a + (b - a) * s), alpha)
    meta = f"fit {spec} on [{a:g}, {b:g}] N={n} alpha={alpha:g}"
    return mixture_from_samples(g, a, b, alpha, meta)


def fit_distribution(spec, interval=None, n: int = 300, alpha: float = 0.25) -> GaussianMixture:
    """Gaussian mixture approximating spec's density.

    Without an interval, location-scale families are fitted once in standard
    form on a default interval and mapped by the affine change of variables.
    """
    from .distributions import Cauchy, Expansion, Mixture

    if isinstance(spec, Mixture):
        return spec.mixture
    if isinstance(spec, (Cauchy, Expansion)):
        raise ParameterError(f"{type(spec).__name__} densities are not fitted by mixtures")
    if interval is not None:
        return fit_on_interval(spec, interval, n, alpha)
    base = spec.standard()
    mix = fit_on_interval(base, BASE_INTERVALS[base.name], n, alpha)
    loc, scale = spec.location_scale
    out = mix.rescale(loc, scale)
    return GaussianMixture(out.weights, out.exponents, out.centers, f"{mix.metadata}; rescaled to {spec}")


# -- serialization -----------------------------------------------------------


def mixture_to_dict(m: GaussianMixture) -> dict:
    fmt = lambda x: format(float(x), ".17g")  # noqa: E731
    return {
        "kind": "gaussian_mixture",
        "metadata": m.metadata,
        "terms": [[fmt(c), fmt(b), fmt(s)] for c, b, s in m.terms],
    }


def mixture_from_dict(d: dict) -> GaussianMixture:
    if d.get("kind") != "gaussian_mixture":
        raise ParameterError("not a gaussian_mixture record")
    return GaussianMixture.from_terms(
        ((float(c), float(b), float(s)) for c, b, s in d["terms"]), d.get("metadata", "")
    )


def dumps_mixture(m: GaussianMixture) -> str:
    return json.dumps(mixture_to_dict(m), indent=1)


def loads_mixture(text: str) -> GaussianMixture:
    return mixture_from_dict(json.loads(text))
