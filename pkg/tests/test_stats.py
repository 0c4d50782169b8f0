import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import stats as sps

from gmra.core import GmraExpansion, GmraParams, expansion_from_gaussians
from gmra.errors import MomentDivergenceError, ParameterError
from gmra.mixture import fit_laplace_unit
from gmra.stats import basis_moment, cdf, expectation, moment

P = GmraParams()


def normal_expansion(mu, sigma):
    c = 1 / (math.sqrt(2 * math.pi) * sigma)
    return expansion_from_gaussians([(c, 0.5 / sigma**2, mu)], P)


def normal_raw_moment(mu, sigma, n):
    """E[X^n], X ~ N(mu, sigma^2), by the binomial expansion and central moments."""
    total = 0.0
    for i in range(0, n + 1, 2):
        central = math.prod(range(i - 1, 0, -2)) * sigma**i
        total += math.comb(n, i) * mu ** (n - i) * central
    return total


class TestBasisMoment:
    def test_low_orders(self):
        a = 0.25
        assert basis_moment(3.0, 0, a) == 1.0
        assert basis_moment(3.0, 1, a) == 3.0
        assert basis_moment(3.0, 2, a) == pytest.approx(9.0 + 1 / (2 * a))
        assert basis_moment(3.0, 3, a) == pytest.approx(27.0 + 9.0 / (2 * a))

    @settings(max_examples=40, deadline=None)
    @given(st.floats(-20, 20), st.integers(0, 8), st.floats(0.1, 0.5))
    def test_matches_binomial_expansion(self, k, n, alpha):
        ref = normal_raw_moment(k, math.sqrt(1 / (2 * alpha)), n)
        scale = (abs(k) + math.sqrt(1 / alpha)) ** n
        assert basis_moment(k, n, alpha) == pytest.approx(ref, abs=1e-13 * scale)

    def test_negative_order(self):
        with pytest.raises(ParameterError):
            basis_moment(0.0, -1, 0.25)


class TestMoments:
    @pytest.mark.parametrize("mu,sigma", [(0.0, 1.0), (2.0, 0.5), (-3.0, 4.0)])
    def test_normal_moments(self, mu, sigma):
        e = normal_expansion(mu, sigma)
        for n in range(5):
            ref = normal_raw_moment(mu, sigma, n)
            assert moment(e, n) == pytest.approx(ref, rel=1e-12, abs=1e-12)

    def test_moments_agree_with_quadrature(self):
        e = expansion_from_gaussians(fit_laplace_unit().rescale(1.0, 0.5).terms, P)
        for n in range(4):
            quad = expectation(lambda t, n=n: t**n, e)
            assert moment(e, n) == pytest.approx(quad, rel=1e-10, abs=1e-12)

    def test_heavy_tailed_rejects_higher_moments(self):
        e = GmraExpansion.from_coefficients(P, [(0, 0, 1.0)], heavy_tailed=True)
        assert moment(e, 0) == pytest.approx(1.0)
        with pytest.raises(MomentDivergenceError):
            moment(e, 1)


class TestCdf:
    @pytest.mark.parametrize("mu,sigma", [(0.0, 1.0), (1.5, 0.3), (-2.0, 3.0)])
    def test_normal_cdf(self, mu, sigma):
        e = normal_expansion(mu, sigma)
        t = np.linspace(mu - 8 * sigma, mu + 8 * sigma, 401)
        np.testing.assert_allclose(cdf(e, t), sps.norm(mu, sigma).cdf(t), atol=1e-12)

    def test_left_tail_relative(self):
        e = normal_expansion(0.0, 1.0)
        assert cdf(e, -30.0) == pytest.approx(sps.norm.cdf(-30.0), rel=1e-9)

    def test_limits(self):
        e = normal_expansion(0.0, 1.0)
        assert cdf(e, -1e300) == 0.0
        assert cdf(e, 1e300) == pytest.approx(moment(e, 0), rel=1e-15)

    def test_derivative_is_density(self):
        e = normal_expansion(0.3, 0.7)
        t = np.linspace(-1, 1.5, 11)
        h = 1e-5
        slope = (cdf(e, t + h) - cdf(e, t - h)) / (2 * h)
        np.testing.assert_allclose(slope, e(t), rtol=1e-8)

    def test_symmetric_density_splits_mass(self):
        e = expansion_from_gaussians(fit_laplace_unit().terms, P)
        assert cdf(e, 0.0) == pytest.approx(moment(e, 0) / 2, rel=1e-13)

    @settings(max_examples=30, deadline=None)
    @given(st.floats(-10, 10), st.floats(0, 5))
    def test_monotone(self, t, dt):
        e = normal_expansion(0.0, 2.0)
        assert cdf(e, t + dt) >= cdf(e, t) - 1e-16

    def test_scalar_and_shape(self):
        e = normal_expansion(0.0, 1.0)
        assert isinstance(cdf(e, 0.0), float)
        assert cdf(e, np.zeros((2, 3))).shape == (2, 3)
