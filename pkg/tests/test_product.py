import math

import numpy as np
import pytest
from oracles import k0_density

from gmra.core import GmraExpansion, GmraParams, expansion_from_gaussians
from gmra.distributions import Cauchy, Expansion, Gumbel, Laplace, Normal
from gmra.errors import MomentDivergenceError, ParameterError, TableRangeError
from gmra.product import (
    TiltedExpansion,
    build_basis_tables,
    order_factors,
    product,
    product_bivariate_normal,
    product_gmra,
    product_with_normal,
    thread_count,
)
from gmra.stats import expectation, moment

P = GmraParams()
EPS = P.epsilon
LOGT = np.logspace(-20, 1, 300)
SYM = np.concatenate([-LOGT[::-1], LOGT])


def normal_expansion(mu, sigma, params=P):
    c = 1 / (math.sqrt(2 * math.pi) * sigma)
    return expansion_from_gaussians([(c, 0.5 / sigma**2, mu)], params)


@pytest.fixture(scope="module")
def k0_product():
    return product(Normal(0, 1), Normal(0, 1), P)


class TestOrdering:
    def test_larger_ratio_first(self):
        f, g = order_factors(Normal(2, 1), Normal(6, 1))
        assert f == Normal(6, 1) and g == Normal(2, 1)

    def test_tie_keeps_input_order(self):
        x, y = Normal(0, 1), Normal(0, 2)
        assert order_factors(x, y) == (x, y)

    def test_gaussian_terms(self):
        # ratio m^2 / (2 s^2) orders terms with larger centre first
        f, _ = order_factors(Normal(1, 1), Normal(3, 1))
        assert f.mu == 3


class TestProductWithNormal:
    def test_k0(self, k0_product):
        t = np.logspace(-27, 0, 200)
        rel = np.abs(k0_product(t) / k0_density(t) - 1)
        assert rel.max() <= 5e-13

    def test_symmetric(self, k0_product):
        v = k0_product(LOGT)
        np.testing.assert_allclose(k0_product(-LOGT), v, rtol=1e-13)

    @pytest.mark.parametrize("x,y", [(Normal(2, 1), Normal(1, 1)), (Normal(-1, 0.5), Normal(3, 2))])
    def test_mass_and_mean(self, x, y):
        e = product(x, y, P)
        assert moment(e, 0) == pytest.approx(1.0, abs=1e-12)
        assert moment(e, 1) == pytest.approx(x.mu * y.mu, abs=1e-10)

    def test_scale_of_product(self):
        # sigma_x sigma_y K0(|t| / sigma_x sigma_y) / pi, divided by sigma_x sigma_y
        e = product(Normal(0, 2), Normal(0, 1.5), P)
        t = np.logspace(-10, 0.5, 50)
        np.testing.assert_allclose(e(t), k0_density(t / 3.0) / 3.0, rtol=1e-12)

    def test_bad_sigma(self):
        with pytest.raises(ParameterError):
            product_with_normal(Normal(0, 1), 0.0, 0.0, P)

    def test_threads_give_identical_result(self, k0_product):
        e = product(Normal(0, 1), Normal(0, 1), P, workers=4)
        assert list(e.coefficients()) == list(k0_product.coefficients())

    def test_thread_count_from_environment(self, monkeypatch):
        monkeypatch.setenv("GMRA_THREADS", "3")
        assert thread_count() == 3
        monkeypatch.setenv("GMRA_THREADS", "x")
        with pytest.raises(ParameterError):
            thread_count()


class TestOrderInvariance:
    def test_values_agree_and_preferred_order_is_sparser(self):
        x, y = Normal(6, 1), Normal(2, 1)
        a = product_with_normal(x, y.mu, y.sigma, P)
        b = product_with_normal(y, x.mu, x.sigma, P)
        t = np.linspace(-20, 60, 1000)
        ref = np.maximum(np.abs(a(t)), np.abs(b(t)))
        assert np.max(np.abs(a(t) - b(t))) <= 10 * EPS * ref.max()
        assert len(a.scales) <= len(b.scales)


class TestHeavyTailed:
    def test_cauchy_marks_expansion(self):
        e = product(Cauchy(0, 1), Normal(0, 1), GmraParams(j_min=-5, j_max=60))
        assert e.heavy_tailed
        with pytest.raises(MomentDivergenceError):
            moment(e, 1)

    def test_cauchy_pair_rejected(self):
        with pytest.raises(ParameterError):
            product(Cauchy(0, 1), Laplace(0, 1), P)


@pytest.fixture(scope="module")
def tables():
    # fine scales resolve the logarithmic singularity at 0
    return build_basis_tables(P, 10, (-30, 30), (-30, 30), (-5, 60), (-60, 60))


class TestBasisTables:
    def test_peak(self, tables):
        i, j = 3, 0
        m = 2.0 ** (2 - j - tables.tau[i])
        assert tables.U(-1, j, m, i) == 1.0

    def test_v_symmetry(self, tables):
        np.testing.assert_array_equal(tables.V_plus, tables.V_minus[::-1])

    def test_cutoff(self, tables):
        i, k = 0, 0
        mp = 20
        assert tables.V(-1, k, mp, i) <= math.exp(-100)
        row = k - tables.k_range[0]
        col = mp - tables.mp_range[0]
        assert tables.V_minus[row, col, i] == 0.0

    def test_read_only(self, tables):
        with pytest.raises(ValueError):
            tables.U_minus[0, 0, 0] = 1.0

    def test_single_term_mass(self, tables):
        a = GmraExpansion.from_coefficients(P, [(0, 0, 1.0)])
        e = product_gmra(a, a, tables)
        assert moment(e, 0) == pytest.approx(moment(a, 0) ** 2, abs=1e-10)

    def test_range_error(self, tables):
        a = GmraExpansion.from_coefficients(P, [(0, 100, 1.0)])
        with pytest.raises(TableRangeError):
            product_gmra(a, a, tables)


class TestProductGmra:
    def test_single_term_mass_adaptive(self):
        a = GmraExpansion.from_coefficients(P, [(0, 0, 1.0)])
        e = product_gmra(a, a)
        assert moment(e, 0) == pytest.approx(moment(a, 0) ** 2, abs=1e-10)

    def test_matches_normal_pipeline(self, k0_product):
        n = normal_expansion(0.0, 1.0)
        e = product_gmra(n, n)
        # t = 0 is the logarithmic singularity, excluded from the grid
        t = SYM
        ref = k0_product(t)
        assert np.max(np.abs(e(t) - ref) / ref) <= 10 * EPS

    def test_alpha_mismatch(self):
        a = GmraExpansion.from_coefficients(P, [(0, 0, 1.0)])
        b = GmraExpansion.from_coefficients(GmraParams(alpha=0.3), [(0, 0, 1.0)])
        with pytest.raises(ParameterError):
            product_gmra(a, b)

    def test_associativity_across_pipelines(self, k0_product):
        # (X1 X2) X3 by the normal pipeline, X3 (X1 X2) by the expansion pipeline
        a = product_with_normal(Expansion(k0_product), 0.0, 1.0, P)
        b = product_gmra(normal_expansion(0.0, 1.0), k0_product, ordered=False)
        assert np.max(np.abs(a(SYM) / b(SYM) - 1)) <= 1e-11


class TestMixtureProducts:
    def test_laplace_gumbel(self):
        x, y = Laplace(3, 1), Gumbel(2, 3)
        e = product(x, y, P)
        assert moment(e, 0) == pytest.approx(1.0, abs=1e-5)
        assert moment(e, 1) == pytest.approx(x.mean() * y.mean(), abs=1e-5)
        second = (x.var() + x.mean() ** 2) * (y.var() + y.mean() ** 2)
        assert moment(e, 2) == pytest.approx(second, abs=1e-5)


class TestBivariate:
    def test_rho_zero_is_independent_product(self):
        b = product_bivariate_normal(1.0, -0.5, 1.0, 2.0, 0.0, P)
        e = product(Normal(1.0, 1.0), Normal(-0.5, 2.0), P)
        assert b.tilt_c == 0.0
        t = np.linspace(-10, 10, 1001)
        t = t[t != 0]
        assert np.max(np.abs(b(t) - e(t))) <= 1e-12

    def test_standard_correlated(self):
        b = product_bivariate_normal(0.0, 0.0, 1.0, 1.0, 0.5, P)
        assert isinstance(b, TiltedExpansion)
        assert expectation(lambda t: np.ones_like(t), b) == pytest.approx(1.0, abs=1e-8)
        assert expectation(lambda t: t, b) == pytest.approx(0.5, abs=1e-8)

    def test_nonzero_means(self):
        mx, my, sx, sy, rho = 1.0, 2.0, 0.5, 1.5, -0.3
        b = product_bivariate_normal(mx, my, sx, sy, rho, P)
        assert expectation(lambda t: np.ones_like(t), b) == pytest.approx(1.0, abs=1e-8)
        assert expectation(lambda t: t, b) == pytest.approx(rho * sx * sy + mx * my, abs=1e-8)

    def test_bad_rho(self):
        with pytest.raises(ParameterError):
            product_bivariate_normal(0, 0, 1, 1, 1.0, P)
