import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from oracles import projection_residual, two_scale_residual

from gmra.core import (
    GmraExpansion,
    GmraParams,
    compress,
    dumps_expansion,
    dumps_expansion_text,
    expansion_from_gaussians,
    loads_expansion,
    loads_expansion_text,
    project_gaussian,
    scale_for_exponent,
    two_scale_coeffs,
)
from gmra.errors import ParameterError, ScaleOverflowError

P = GmraParams()


class TestParams:
    @pytest.mark.parametrize(
        "kw", [{"alpha": 0.0}, {"alpha": 0.6}, {"j_min": 3, "j_max": 2}, {"drop_threshold": 1.0}]
    )
    def test_invalid(self, kw):
        with pytest.raises(ParameterError):
            GmraParams(**kw)

    def test_epsilon(self):
        assert P.epsilon == pytest.approx(2.767e-13, rel=1e-3)


class TestScaleSelection:
    @settings(max_examples=200, deadline=None)
    @given(st.floats(1e-20, 1e20))
    def test_window_brackets_exponent(self, beta):
        j = scale_for_exponent(beta, P)
        assert 4.0 ** (j - 2) * P.alpha < beta <= 4.0 ** (j - 1) * P.alpha

    def test_boundary_belongs_to_lower_scale(self):
        assert scale_for_exponent(P.alpha, P) == 1
        assert scale_for_exponent(4 * P.alpha, P) == 2

    def test_rejects_nonpositive(self):
        with pytest.raises(ParameterError):
            scale_for_exponent(0.0, P)


class TestProjection:
    def test_unit_exponent_example(self):
        # beta = 1 with alpha = 1/4 lands on j = 2 with b = 1/16
        pg = project_gaussian(1.0, 0.0, P)
        assert pg.scale == 2
        g0 = pg.coeffs[-pg.k0]
        assert g0 == pytest.approx(0.5 * math.sqrt(4.0 / 3.0), rel=1e-15)

    def test_phi_itself_gives_two_scale_filter(self):
        pg = project_gaussian(P.alpha, 0.0, P, rel_cutoff=1e-17)
        h = two_scale_coeffs(P, rel_cutoff=1e-17)
        # phi = sum_k (h_k / sqrt 2) phi_1k, and phi carries the factor sqrt(alpha/pi)
        assert pg.scale == 1
        np.testing.assert_allclose(pg.coeffs * P.phi_norm, h / math.sqrt(2), rtol=1e-14)

    def test_out_of_window(self):
        with pytest.raises(ScaleOverflowError):
            project_gaussian(1e80, 0.0, P)

    @settings(max_examples=40, deadline=None)
    @given(st.floats(1e-6, 1e6), st.floats(-50, 50))
    def test_relative_residual_bound(self, beta, s):
        pg = project_gaussian(beta, s, P, rel_cutoff=1e-300)
        w = 6 / math.sqrt(beta)
        x = np.linspace(s - w, s + w, 801)
        assert projection_residual(pg, beta, s, P.alpha, x) <= 1.01 * P.epsilon

    def test_two_scale_relation(self):
        h = two_scale_coeffs(P, rel_cutoff=1e-300)
        x = np.linspace(-10, 10, 2001)
        assert two_scale_residual(P.alpha, h, x) <= 1.01 * P.epsilon

    def test_two_scale_formula_in_extended_precision(self):
        # far-tail coefficients rounded to double drift by ~|k|^2 eps, so the
        # formula itself is checked with extended-precision coefficients
        kmax = (two_scale_coeffs(P, rel_cutoff=1e-300).size - 1) // 2
        k = np.arange(-kmax, kmax + 1, dtype=np.longdouble)
        a = np.longdouble(P.alpha)
        h = np.sqrt(4 * a / (3 * np.longdouble(np.pi))) * np.exp(-a * k * k / 3)
        x = np.linspace(-20, 20, 2001)
        assert two_scale_residual(P.alpha, h, x) <= 1.001 * P.epsilon


class TestExpansion:
    def test_linearity(self):
        terms = [(2.0, 1.0, 0.5), (-0.5, 3.0, -1.0)]
        e = expansion_from_gaussians(terms, P)
        ea = expansion_from_gaussians(terms[:1], P)
        eb = expansion_from_gaussians(terms[1:], P)
        t = np.linspace(-4, 4, 301)
        np.testing.assert_allclose(e(t), (ea + eb)(t), atol=1e-15)
        np.testing.assert_allclose(e.scaled(3.0)(t), 3 * e(t), atol=1e-14)

    def test_evaluation_matches_gaussian(self):
        e = expansion_from_gaussians([(1.0, 2.5, 0.3)], P)
        t = np.linspace(-3, 3, 1001)
        np.testing.assert_allclose(e(t), np.exp(-2.5 * (t - 0.3) ** 2), rtol=1e-12, atol=1e-15)

    def test_scalar_evaluation(self):
        e = expansion_from_gaussians([(1.0, 1.0, 0.0)], P)
        assert isinstance(e(0.0), float)

    def test_from_coefficients_duplicate(self):
        with pytest.raises(ParameterError):
            GmraExpansion.from_coefficients(P, [(0, 1, 1.0), (0, 1, 2.0)])

    def test_coefficients_roundtrip(self):
        coeffs = [(0, -2, 1.5), (0, 3, -0.25), (4, 7, 2.0)]
        e = GmraExpansion.from_coefficients(P, coeffs)
        assert list(e.coefficients()) == coeffs
        assert e.n_coeffs == 3
        assert e.scale_counts() == {0: 2, 4: 1}

    def test_window_enforced(self):
        with pytest.raises(ScaleOverflowError):
            GmraExpansion.from_coefficients(GmraParams(j_min=0, j_max=5), [(6, 0, 1.0)])

    def test_compress(self):
        e = GmraExpansion.from_coefficients(P, [(0, 0, 1.0), (0, 1, 1e-9), (1, 0, -0.5)])
        c = compress(e, 1e-6)
        assert c.n_coeffs == 2
        assert compress(e, 0.0) is e
        with pytest.raises(ParameterError):
            compress(e, 1.5)


class TestSerialization:
    @settings(max_examples=30, deadline=None)
    @given(
        st.lists(
            st.tuples(st.integers(-40, 100), st.integers(-10**6, 10**6), st.floats(-1e6, 1e6)),
            max_size=20,
            unique_by=lambda c: c[:2],
        )
    )
    def test_json_and_text_roundtrip(self, coeffs):
        coeffs = [c for c in coeffs if c[2] != 0.0]
        e = GmraExpansion.from_coefficients(P, coeffs, metadata="test", heavy_tailed=True)
        for back in (loads_expansion(dumps_expansion(e)), loads_expansion_text(dumps_expansion_text(e))):
            assert list(back.coefficients()) == list(e.coefficients())
            assert back.params == e.params
            assert back.heavy_tailed
