"""Gaussian multiresolution expansions of product distributions."""

from .core import (
    GmraExpansion,
    GmraParams,
    compress,
    eval_expansion,
    expansion_from_gaussians,
    project_gaussian,
    two_scale_coeffs,
)
from .distributions import Cauchy, Expansion, Gumbel, Laplace, Mixture, Normal
from .mixture import GaussianMixture, fit_distribution, fit_laplace_unit, fit_sampled
from .product import (
    TiltedExpansion,
    build_basis_tables,
    order_factors,
    product,
    product_bivariate_normal,
    product_gmra,
    product_with_normal,
)
from .quadrature import AdaptiveConfig, adaptive_integrate
from .special import epsilon_of_alpha
from .stats import cdf, expectation, moment

__all__ = [
    "AdaptiveConfig",
    "Cauchy",
    "Expansion",
    "GaussianMixture",
    "GmraExpansion",
    "GmraParams",
    "Gumbel",
    "Laplace",
    "Mixture",
    "Normal",
    "TiltedExpansion",
    "adaptive_integrate",
    "build_basis_tables",
    "cdf",
    "compress",
    "epsilon_of_alpha",
    "eval_expansion",
    "expansion_from_gaussians",
    "expectation",
    "fit_distribution",
    "fit_laplace_unit",
    "fit_sampled",
    "moment",
    "order_factors",
    "product",
    "product_bivariate_normal",
    "product_gmra",
    "product_with_normal",
    "project_gaussian",
    "two_scale_coeffs",
]
