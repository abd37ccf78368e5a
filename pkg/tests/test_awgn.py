"""AWGN ensembles against independent two-dimensional quadrature.

The frozen references come from ``scipy.integrate.dblquad`` over the
joint density of the transmitted-word statistic and the largest competing
statistic, written directly from the ensemble definitions (no shared code
with the library).
"""

import math

import numpy as np
import pytest
from scipy import stats

from fble import awgn_gaussian as ag
from fble import awgn_spherical as asph
from fble._types import (LN2, AwgnParams, CapabilityError, CodeParams, DomainError, EvalOptions)

SPHERICAL_ORACLE = {
    (4, 4, 1.0): 0.24067814923014774,
    (8, 16, 2.0): 0.08942696970585651,
    (12, 8, 1.0): 0.06613846601618423,
}
GAUSSIAN_ORACLE = {
    (4, 4, 100.0): 0.00021760108855140015,
    (8, 16, 2.0): 0.11427916182936837,
    (12, 8, 1.0): 0.08187349156351809,
}
FIG2 = (CodeParams(N=470, R=0.5), AwgnParams.from_snr_db(1.3))


class TestSphericalCdf:
    @pytest.mark.parametrize("N", [3, 10, 101])
    def test_single_codeword_is_beta(self, N):
        # M = 2: one wrong codeword, cos**2 ~ Beta(1/2, (N-1)/2)
        code = CodeParams(N=N, M=2)
        for v in (-0.6, -0.1, 0.0, 0.2, 0.7):
            half = 0.5 * stats.beta.sf(v * v, 0.5, 0.5 * (N - 1))
            ref = half if v < 0 else 1.0 - half
            np.testing.assert_allclose(asph.cond_cdf_rho_max(v, code).prob, ref, rtol=1e-12)

    def test_power_of_many(self):
        code = CodeParams(N=20, M=1000)
        g1 = asph.cond_cdf_rho_max(0.3, CodeParams(N=20, M=2)).prob
        np.testing.assert_allclose(asph.cond_cdf_rho_max(0.3, code).prob, g1**999, rtol=1e-12)

    def test_approx_close_for_large_nr(self):
        code = CodeParams(N=470, R=0.5)
        for v in (0.55, 0.6, 0.65):
            e = asph.cond_cdf_rho_max(v, code).log_value
            a = asph.cond_cdf_rho_max_approx(v, code).log_value
            np.testing.assert_allclose(a, e, rtol=1e-2)

    def test_domain(self):
        with pytest.raises(DomainError):
            asph.cond_cdf_rho_max(1.5, CodeParams(N=5, M=4))
        with pytest.raises(DomainError):
            asph.cond_cdf_rho_max_approx(0.5, CodeParams(N=5, M=4))
        with pytest.raises(DomainError):
            asph.pe_exact(CodeParams(N=1, M=2), AwgnParams(1.0))


class TestSphericalPe:
    @pytest.mark.parametrize("key", sorted(SPHERICAL_ORACLE))
    def test_against_quadrature_oracle(self, key):
        N, M, P = key
        r = asph.pe_exact(CodeParams(N=N, M=M), AwgnParams(P))
        np.testing.assert_allclose(r.pe, SPHERICAL_ORACLE[key], rtol=1e-9)

    @pytest.mark.parametrize("key", sorted(SPHERICAL_ORACLE))
    def test_noncentral_t_path_agrees(self, key):
        N, M, P = key
        r = asph.pe_via_noncentral_t(CodeParams(N=N, M=M), AwgnParams(P))
        np.testing.assert_allclose(r.pe, SPHERICAL_ORACLE[key], rtol=1e-8)

    def test_single_codeword_is_zero(self):
        r = asph.pe_exact(CodeParams(N=10, M=1), AwgnParams(1.0))
        assert r.pe == 0.0 and r.log_pe == -math.inf

    def test_reference_point(self):
        code, chan = FIG2
        e = asph.pe_exact(code, chan)
        t = asph.pe_via_noncentral_t(code, chan)
        np.testing.assert_allclose(e.pe, t.pe, rtol=1e-6)
        assert 1e-4 < e.pe < 1e-2

    def test_monotone_in_power(self):
        code = CodeParams(N=30, R=0.5)
        pe = [asph.pe_exact(code, AwgnParams(P)).pe for P in (0.5, 1.0, 2.0, 4.0)]
        assert np.all(np.diff(pe) < 0)

    def test_monotone_in_rate(self):
        chan = AwgnParams(1.0)
        pe = [asph.pe_exact(CodeParams(N=40, R=R), chan).pe for R in (0.2, 0.35, 0.5)]
        assert np.all(np.diff(pe) > 0)

    def test_near_certain_error_uses_complement(self):
        r = asph.pe_exact(CodeParams(N=60, R=2.0), AwgnParams(0.5))
        assert r.diagnostics.get("from_complement")
        assert r.pe > 0.999
        t = asph.pe_via_noncentral_t(CodeParams(N=60, R=2.0), AwgnParams(0.5))
        np.testing.assert_allclose(r.pe, t.pe, rtol=1e-12)
        assert -1e-15 < r.log_pe < 0.0

    @pytest.mark.parametrize("N,R", [(5000, 0.1), (20000, 0.2)])
    def test_deep_tail_agrees_with_single_integral(self, N, R):
        # mass lies tens of standard deviations from the mean here
        code, chan = CodeParams(N=N, R=R), AwgnParams(1.0)
        e = asph.pe_exact(code, chan)
        assert e.pe == 0.0 and e.log_pe < -700
        np.testing.assert_allclose(e.log_pe, asph.pe_via_noncentral_t(code, chan).log_pe,
                                   rtol=1e-10)

    def test_exact_path_capability(self):
        code = CodeParams(N=2000, R=0.6)
        with pytest.raises(CapabilityError):
            asph.pe_exact(code, AwgnParams(1.0), EvalOptions(method="exact"))

    def test_approx_path_for_large_nr(self):
        code, chan = FIG2
        a = asph.pe_exact(code, chan, EvalOptions(method="approx"))
        e = asph.pe_exact(code, chan, EvalOptions(method="exact"))
        np.testing.assert_allclose(a.pe, e.pe, rtol=0.05)


class TestMedianAndSpherePacking:
    def test_two_codewords_median_is_zero(self):
        assert asph.median_rho(CodeParams(N=9, M=2)) == pytest.approx(0.0, abs=1e-12)

    @pytest.mark.parametrize("N,M", [(5, 3), (30, 1000), (200, 2.0**80)])
    def test_median_halves_cdf(self, N, M):
        code = CodeParams(N=N, M=M)
        m = asph.median_rho(code)
        np.testing.assert_allclose(asph.cond_cdf_rho_max(m, code).log_value, -LN2, rtol=1e-10)

    def test_sphere_packing_cap_fraction(self):
        code = CodeParams(N=50, R=0.5)
        rho = asph.sphere_packing_radius(code)
        frac = 0.5 * stats.beta.sf(rho * rho, 0.5, 0.5 * (code.N - 1))
        np.testing.assert_allclose(frac, 2.0**-25, rtol=1e-10)

    def test_bounds_below_exact(self):
        code, chan = FIG2
        e = asph.pe_exact(code, chan).log_pe
        assert asph.median_bound(code, chan).log_pe <= e
        assert asph.sphere_packing_bound(code, chan).log_pe <= e

    def test_bound_flags(self):
        code, chan = FIG2
        assert asph.median_bound(code, chan).is_lower_bound
        assert asph.sphere_packing_bound(code, chan).is_lower_bound

    def test_sphere_packing_needs_two_words(self):
        with pytest.raises(DomainError):
            asph.sphere_packing_bound(CodeParams(N=10, M=1.5), AwgnParams(1.0))


class TestFixedPoint:
    def test_contraction_solution(self):
        code = CodeParams(N=470, R=0.5)
        assert asph.banach_condition(code)
        info = asph.fixed_point_inversion(-LN2, code)
        assert info.path == "fixed-point" and info.banach_ok
        assert info.residual < 1e-12
        np.testing.assert_allclose(asph.cond_cdf_rho_max_approx(info.rho, code).log_value, -LN2,
                                   rtol=1e-9)

    def test_bisection_fallback(self):
        code = CodeParams(N=64, R=0.05)
        assert not asph.banach_condition(code)
        info = asph.fixed_point_inversion(-1.0, code)
        assert info.path == "bisection"
        lnl, _ = asph._lnneglog_G_approx(np.array([info.rho]), code.N, code.log2_M)
        np.testing.assert_allclose(lnl[0], 0.0, atol=1e-9)

    def test_target_domain(self):
        with pytest.raises(DomainError):
            asph.fixed_point_inversion(0.0, CodeParams(N=100, R=0.5))


class TestGaussian:
    @pytest.mark.parametrize("key", sorted(GAUSSIAN_ORACLE))
    def test_against_quadrature_oracle(self, key):
        N, M, P = key
        r = ag.pe_exact_gaussian(CodeParams(N=N, M=M), AwgnParams(P))
        np.testing.assert_allclose(r.pe, GAUSSIAN_ORACLE[key], rtol=1e-9)

    def test_cond_cdf_distance_is_ncx2(self):
        for d, r, N, P in [(3.0, 2.0, 4, 1.0), (20.0, 5.0, 12, 2.0), (1e-3, 0.1, 2, 0.5)]:
            ref = stats.ncx2.cdf(d, N, r * r / P)
            np.testing.assert_allclose(ag.cond_cdf_distance(d, r, N, P), ref, rtol=1e-10)

    def test_cond_cdf_distance_edges(self):
        assert ag.cond_cdf_distance(0.0, 1.0, 4, 1.0) == 0.0
        assert ag.cond_cdf_distance(math.inf, 1.0, 4, 1.0) == 1.0
        with pytest.raises(DomainError):
            ag.cond_cdf_distance(-1.0, 1.0, 4, 1.0)

    def test_worse_than_spherical(self):
        code, chan = CodeParams(N=30, R=0.5), AwgnParams(2.0)
        assert ag.pe_exact_gaussian(code, chan).pe > asph.pe_exact(code, chan).pe

    def test_single_codeword_and_capability(self):
        assert ag.pe_exact_gaussian(CodeParams(N=5, M=1), AwgnParams(1.0)).pe == 0.0
        with pytest.raises(CapabilityError):
            ag.pe_exact_gaussian(CodeParams(N=3000, R=0.5), AwgnParams(1.0))
