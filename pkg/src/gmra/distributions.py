"""Distribution specifications used as product factors.

Every variant evaluates its density pointwise (vectorized) and knows its
first two moments where they exist.  Location-scale families also expose
their standard form so fits can be done once and rescaled.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .core import GmraExpansion
from .errors import MomentDivergenceError, ParameterError
from .mixture import GaussianMixture
from .special import EULER_GAMMA, erfc

_SQRT2 = math.sqrt(2.0)


def _check_positive(name, v):
    if not (v > 0 and math.isfinite(v)):
        raise ParameterError(f"{name} must be positive and finite, got {v!r}")


def _out(a, x):
    return float(a) if np.ndim(x) == 0 else a


class DistributionSpec:
    name = ""
    heavy_tailed = False

    def pdf(self, x):
        raise NotImplementedError

    def cdf(self, x):
        raise NotImplementedError

    def sf(self, x):
        return 1.0 - self.cdf(x)

    def mean(self) -> float:
        raise NotImplementedError

    def var(self) -> float:
        raise NotImplementedError

    def sample(self, rng: np.random.Generator, size: int) -> np.ndarray:
        raise ParameterError(f"no sampler for {self}")

    def ordering_ratio(self) -> float:
        """mu^2 / (2 sigma^2), used to order the factors of a product."""
        return self.mean() ** 2 / (2.0 * self.var())


@dataclass(frozen=True)
class Normal(DistributionSpec):
    mu: float = 0.0
    sigma: float = 1.0
    name = "normal"

    def __post_init__(self):
        _check_positive("sigma", self.sigma)

    def __str__(self):
        return f"normal({self.mu:g},{self.sigma:g})"

    def pdf(self, x):
        z = (np.asarray(x, dtype=float) - self.mu) / self.sigma
        return _out(np.exp(-0.5 * z * z) / (math.sqrt(2 * math.pi) * self.sigma), x)

    def cdf(self, x):
        z = (np.asarray(x, dtype=float) - self.mu) / self.sigma
        return _out(0.5 * erfc(-z / _SQRT2), x)

    def sf(self, x):
        z = (np.asarray(x, dtype=float) - self.mu) / self.sigma
        return _out(0.5 * erfc(z / _SQRT2), x)

    def mean(self):
        return self.mu

    def var(self):
        return self.sigma**2

    def sample(self, rng, size):
        return rng.normal(self.mu, self.sigma, size)

    def standard(self):
        return Normal()

    @property
    def location_scale(self):
        return self.mu, self.sigma


@dataclass(frozen=True)
class Laplace(DistributionSpec):
    mu: float = 0.0
    b: float = 1.0
    name = "laplace"

    def __post_init__(self):
        _check_positive("b", self.b)

    def __str__(self):
        return f"laplace({self.mu:g},{self.b:g})"

    def pdf(self, x):
        z = np.abs(np.asarray(x, dtype=float) - self.mu) / self.b
        return _out(np.exp(-z) / (2 * self.b), x)

    def cdf(self, x):
        z = (np.asarray(x, dtype=float) - self.mu) / self.b
        return _out(np.where(z < 0, 0.5 * np.exp(np.minimum(z, 0)), 1 - 0.5 * np.exp(-np.abs(z))), x)

    def sf(self, x):
        z = (np.asarray(x, dtype=float) - self.mu) / self.b
        return _out(np.where(z > 0, 0.5 * np.exp(-np.maximum(z, 0)), 1 - 0.5 * np.exp(-np.abs(z))), x)

    def mean(self):
        return self.mu

    def var(self):
        return 2 * self.b**2

    def sample(self, rng, size):
        return rng.laplace(self.mu, self.b, size)

    def standard(self):
        return Laplace()

    @property
    def location_scale(self):
        return self.mu, self.b


@dataclass(frozen=True)
class Gumbel(DistributionSpec):
    mu: float = 0.0
    sigma: float = 1.0
    name = "gumbel"

    def __post_init__(self):
        _check_positive("sigma", self.sigma)

    def __str__(self):
        return f"gumbel({self.mu:g},{self.sigma:g})"

    def pdf(self, x):
        z = (np.asarray(x, dtype=float) - self.mu) / self.sigma
        with np.errstate(over="ignore"):
            v = np.exp(-z - np.exp(-z)) / self.sigma
        return _out(v, x)

    def cdf(self, x):
        z = (np.asarray(x, dtype=float) - self.mu) / self.sigma
        with np.errstate(over="ignore"):
            return _out(np.exp(-np.exp(-z)), x)

    def sf(self, x):
        z = (np.asarray(x, dtype=float) - self.mu) / self.sigma
        with np.errstate(over="ignore"):
            return _out(-np.expm1(-np.exp(-z)), x)

    def mean(self):
        return self.mu + EULER_GAMMA * self.sigma

    def var(self):
        return (math.pi * self.sigma) ** 2 / 6

    def sample(self, rng, size):
        return rng.gumbel(self.mu, self.sigma, size)

    def standard(self):
        return Gumbel()

    @property
    def location_scale(self):
        return self.mu, self.sigma


@dataclass(frozen=True)
class Cauchy(DistributionSpec):
    x0: float = 0.0
    gamma: float = 1.0
    name = "cauchy"
    heavy_tailed = True

    def __post_init__(self):
        _check_positive("gamma", self.gamma)

    def __str__(self):
        return f"cauchy({self.x0:g},{self.gamma:g})"

    def pdf(self, x):
        z = (np.asarray(x, dtype=float) - self.x0) / self.gamma
        return _out(1.0 / (math.pi * self.gamma * (1 + z * z)), x)

    def cdf(self, x):
        z = (np.asarray(x, dtype=float) - self.x0) / self.gamma
        return _out(0.5 + np.arctan(z) / math.pi, x)

    def sf(self, x):
        z = (np.asarray(x, dtype=float) - self.x0) / self.gamma
        return _out(0.5 - np.arctan(z) / math.pi, x)

    def mean(self):
        raise MomentDivergenceError("the Cauchy distribution has no mean")

    def var(self):
        raise MomentDivergenceError("the Cauchy distribution has no variance")

    def ordering_ratio(self):
        # location over scale plays the role of the mean-to-width ratio
        return self.x0**2 / (2 * self.gamma**2)

    def sample(self, rng, size):
        return self.x0 + self.gamma * rng.standard_cauchy(size)


@dataclass(frozen=True)
class Mixture(DistributionSpec):
    mixture: GaussianMixture
    name = "mixture"

    def __str__(self):
        return f"mixture[{len(self.mixture)} terms]"

    def pdf(self, x):
        return self.mixture(x)

    def cdf(self, x):
        return self.mixture.cdf(x)

    def sf(self, x):
        return self.mixture.mass() - self.mixture.cdf(x)

    def mean(self):
        return self.mixture.mean()

    def var(self):
        return self.mixture.var()

    def sample(self, rng, size):
        m = self.mixture.term_masses()
        if np.any(m < 0):
            raise ParameterError("cannot sample a mixture with negative weights")
        idx = rng.choice(m.size, size=size, p=m / m.sum())
        sd = 1.0 / np.sqrt(2.0 * self.mixture.exponents[idx])
        return self.mixture.centers[idx] + sd * rng.standard_normal(size)


@dataclass(frozen=True)
class Expansion(DistributionSpec):
    expansion: GmraExpansion
    name = "expansion"

    @property
    def heavy_tailed(self):
        return self.expansion.heavy_tailed

    def __str__(self):
        return f"expansion[{self.expansion.n_coeffs} coeffs]"

    def pdf(self, x):
        return self.expansion(x)

    def cdf(self, x):
        from .stats import cdf

        return cdf(self.expansion, x)

    def mean(self):
        from .stats import moment

        return moment(self.expansion, 1) / moment(self.expansion, 0)

    def var(self):
        from .stats import moment

        m0 = moment(self.expansion, 0)
        return moment(self.expansion, 2) / m0 - (moment(self.expansion, 1) / m0) ** 2
