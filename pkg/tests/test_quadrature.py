import math

import mpmath
import numpy as np
import pytest
from scipy import special

from fble._types import DomainError
from fble.quadrature import (GAUSS_WEIGHTS, KRONROD_NODES, KRONROD_WEIGHTS, adaptive_integrate,
                             gauss_hermite, gauss_laguerre, gauss_legendre, graded_breaks,
                             log_integrate_concave, log_panel_sum, panel_nodes)
from fble.specfun import _mills, log_chi_pdf


class TestKronrod:
    @pytest.mark.parametrize("deg", range(0, 23))
    def test_kronrod_exact_to_degree_22(self, deg):
        exact = 2.0 / (deg + 1) if deg % 2 == 0 else 0.0
        np.testing.assert_allclose(KRONROD_WEIGHTS @ KRONROD_NODES**deg, exact, atol=1e-15)

    @pytest.mark.parametrize("deg", range(0, 14))
    def test_embedded_gauss_exact_to_degree_13(self, deg):
        exact = 2.0 / (deg + 1) if deg % 2 == 0 else 0.0
        np.testing.assert_allclose(GAUSS_WEIGHTS @ KRONROD_NODES**deg, exact, atol=1e-15)

    def test_gauss_uses_every_other_node(self):
        assert np.count_nonzero(GAUSS_WEIGHTS) == 7
        np.testing.assert_array_equal(GAUSS_WEIGHTS[::2], 0.0)

    def test_panel_nodes_cover_intervals(self):
        x, wk, wg = panel_nodes([0.0, 1.0, 3.0])
        assert x.shape == wk.shape == wg.shape == (30,)
        np.testing.assert_allclose(wk.sum(), 3.0, rtol=1e-15)
        np.testing.assert_allclose(wk @ x**5, 3.0**6 / 6, rtol=1e-14)

    def test_log_panel_sum(self):
        x, wk, wg = panel_nodes(np.linspace(0, 50, 11))
        lk, rel = log_panel_sum(-x, wk, wg)
        np.testing.assert_allclose(lk, math.log(-math.expm1(-50.0)), rtol=1e-14)
        assert rel < 1e-8


class TestGaussRules:
    @pytest.mark.parametrize("n", [1, 5, 20, 64])
    def test_hermite_moments(self, n):
        rule = gauss_hermite(n)
        for k in range(0, 2 * n, 2):
            exact = special.gamma((k + 1) / 2)
            np.testing.assert_allclose(rule.integrate(lambda x: x**k), exact, rtol=1e-12)
        np.testing.assert_allclose(rule.nodes, -rule.nodes[::-1], atol=1e-15)

    def test_hermite_integrates_gaussian(self):
        np.testing.assert_allclose(gauss_hermite(40).integrate(np.ones_like), math.sqrt(math.pi),
                                   rtol=4e-15)

    @pytest.mark.parametrize("alpha", [0.0, 0.5, 3.5, 233.5])
    def test_laguerre_mean(self, alpha):
        rule = gauss_laguerre(32, alpha, normalized=True)
        np.testing.assert_allclose(rule.weights @ rule.nodes, alpha + 1, rtol=1e-13)
        np.testing.assert_allclose(rule.log_mass, special.gammaln(alpha + 1), rtol=1e-15)

    def test_laguerre_forced_normalization(self):
        rule = gauss_laguerre(16, 800.0)
        assert rule.normalized
        np.testing.assert_allclose(rule.weights.sum(), 1.0, rtol=1e-14)

    def test_laguerre_unnormalized_mass(self):
        rule = gauss_laguerre(10, 2.0)
        np.testing.assert_allclose(rule.integrate(np.ones_like), 2.0, rtol=1e-14)

    def test_legendre_interval(self):
        rule = gauss_legendre(12, 1.0, 4.0)
        np.testing.assert_allclose(rule.integrate(np.exp), math.exp(4) - math.e, rtol=1e-14)

    @pytest.mark.parametrize("bad", [0, 1025])
    def test_order_range(self, bad):
        with pytest.raises(DomainError):
            gauss_hermite(bad)


class TestConcentrationTransform:
    @pytest.mark.parametrize("N", [2, 10, 470, 10_000])
    def test_chi_mean_and_variance(self, N):
        def moment(k):
            h = lambda x: k * np.log(x) + log_chi_pdf(x, N)
            dh = lambda x: (k + N - 1.0) / x - x
            lv, rel = log_integrate_concave(h, dh, scale=0.5, x_start=math.sqrt(N))
            assert rel < 1e-8
            return math.exp(lv)

        mean = float(mpmath.sqrt(2) * mpmath.gammaprod([(N + 1) / 2], [N / 2]))
        np.testing.assert_allclose(moment(0), 1.0, rtol=1e-13)
        np.testing.assert_allclose(moment(1), mean, rtol=1e-12)
        np.testing.assert_allclose(moment(2) - moment(1) ** 2, N - mean**2, rtol=1e-9)

    def test_endpoint_singularity(self):
        # chi density with nu = 1.01 behaves like x**0.01 at the origin.
        nu = 1.01
        h = lambda x: log_chi_pdf(x, nu) + special.log_ndtr(-2.0 * x)
        dh = lambda x: (nu - 1.0) / x - x - 2.0 * float(_mills(-2.0 * x))
        lv, _ = log_integrate_concave(h, dh, scale=0.5, x_start=1e-3)
        from scipy import stats
        ref = stats.t.sf(2.0 * math.sqrt(nu), nu)
        np.testing.assert_allclose(math.exp(lv), ref, rtol=1e-13)


class TestAdaptive:
    def test_gaussian_on_real_line(self):
        v, err = adaptive_integrate(lambda x: np.exp(-x * x), -math.inf, math.inf)
        np.testing.assert_allclose(v, math.sqrt(math.pi), rtol=1e-13)
        assert err < 1e-9

    def test_narrow_peak_with_points(self):
        f = lambda x: np.exp(-0.5 * ((x - 37.0) / 1e-3) ** 2)
        v, _ = adaptive_integrate(f, 0.0, math.inf, points=(37.0,))
        np.testing.assert_allclose(v, 1e-3 * math.sqrt(2 * math.pi), rtol=1e-10)

    def test_empty_interval(self):
        assert adaptive_integrate(np.exp, 1.0, 1.0)[0] == 0.0


class TestGradedBreaks:
    def test_geometric_and_sorted(self):
        br = graded_breaks(0.0, 10.0, 3.0, 1e-4, 1.0)
        assert br[0] == 0.0 and br[-1] == 10.0
        assert np.all(np.diff(br) > 0)
        assert 3.0 in br
        assert np.min(np.diff(br)) <= 1e-4 * (1 + 1e-9)
        assert np.max(np.diff(br)) <= 1.0 + 1e-12

    def test_empty(self):
        with pytest.raises(DomainError):
            graded_breaks(1.0, 1.0, 1.0, 0.1, 1.0)
