"""Binary-input ensembles against exhaustive enumeration.

For tiny ``(N, M)`` every codebook and every noise pattern is enumerated,
with ML decoding and a fair guess among tied candidates.  The transmitted
codeword is index 0 by symmetry.
"""

import itertools
import math

import numpy as np
import pytest
from scipy import stats

from fble import binary_channels as bc
from fble._types import BecParams, BscParams, CodeParams, DomainError

_POP = np.array([bin(i).count("1") for i in range(1 << 12)])


def _codebooks(N, M):
    grid = np.array(list(itertools.product(range(1 << N), repeat=M)), dtype=np.int64)
    return grid  # shape (2**(N M), M)


def brute_bsc(N, M, f, tie="uniform"):
    books = _codebooks(N, M)
    total = 0.0
    for e in range(1 << N):
        w = _POP[e]
        pr = f**w * (1 - f) ** (N - w)
        r = books[:, :1] ^ e
        d = _POP[books ^ r]
        best = d.min(axis=1, keepdims=True)
        tied = (d == best).sum(axis=1)
        mine = d[:, 0] == best[:, 0]
        if tie == "uniform":
            ok = np.where(mine, 1.0 / tied, 0.0)
        elif tie == "always-wrong":
            ok = (mine & (tied == 1)).astype(float)
        else:
            ok = mine.astype(float)
        total += pr * (1.0 - ok.mean())
    return total


def brute_bec(N, M, f, tie="uniform"):
    books = _codebooks(N, M)
    total = 0.0
    for keep in range(1 << N):
        n = _POP[keep]
        pr = (1 - f) ** n * f ** (N - n)
        match = ((books ^ books[:, :1]) & keep) == 0
        tied = match.sum(axis=1)
        ok = 1.0 / tied if tie == "uniform" else (tied == 1).astype(float)
        total += pr * (1.0 - ok.mean())
    return total


SMALL = [(2, 2), (3, 3), (4, 3), (3, 5), (2, 6)]


class TestBscExact:
    @pytest.mark.parametrize("N,M", SMALL)
    @pytest.mark.parametrize("f", [0.05, 0.2, 0.5])
    def test_enumeration(self, N, M, f):
        r = bc.bsc_pe_exact(CodeParams(N=N, M=M), BscParams(f), J=None)
        np.testing.assert_allclose(r.pe, brute_bsc(N, M, f), rtol=1e-12)

    @pytest.mark.parametrize("N,M", SMALL)
    def test_bounds_enumeration(self, N, M):
        lo, up = bc.bsc_pe_bounds(CodeParams(N=N, M=M), BscParams(0.15))
        np.testing.assert_allclose(lo, brute_bsc(N, M, 0.15, "always-right"), rtol=1e-12)
        np.testing.assert_allclose(up, brute_bsc(N, M, 0.15, "always-wrong"), rtol=1e-12)

    def test_single_use_example(self):
        # N = 1, M = 2: tie w.p. 1/2 (err 1/2), else err iff flipped
        r = bc.bsc_pe_exact(CodeParams(N=1, M=2), BscParams(0.11))
        np.testing.assert_allclose(r.pe, 0.25 + 0.5 * 0.11, rtol=1e-14)
        # optimistic ties fail only when flipped and the wrong word wins: f / 2
        lo, up = bc.bsc_pe_bounds(CodeParams(N=1, M=2), BscParams(0.11))
        np.testing.assert_allclose([lo, up], [0.055, 0.555], rtol=1e-14)

    def test_one_term_is_upper_bound(self):
        code, chan = CodeParams(N=200, R=0.3), BscParams(0.11)
        _, up = bc.bsc_pe_bounds(code, chan)
        np.testing.assert_allclose(bc.bsc_pe_exact(code, chan, J=1).pe, up, rtol=1e-13)

    def test_terms_decrease_to_exact(self):
        code, chan = CodeParams(N=14, M=40), BscParams(0.1)
        pe = [bc.bsc_pe_exact(code, chan, J=j).pe for j in (1, 2, 4, 8, 16, 39)]
        assert np.all(np.diff(pe) <= 1e-15)
        np.testing.assert_allclose(pe[-1], bc.bsc_pe_exact(code, chan, J=None).pe, rtol=1e-13)

    @pytest.mark.parametrize("N,R,f", [(50, 0.2, 0.05), (300, 0.4, 0.08), (2000, 0.45, 0.1)])
    def test_sandwich(self, N, R, f):
        code, chan = CodeParams(N=N, R=R), BscParams(f)
        lo, up = bc.bsc_pe_bounds(code, chan)
        pe = bc.bsc_pe_exact(code, chan).pe
        assert lo <= pe * (1 + 1e-12) and pe <= up * (1 + 1e-12)

    def test_noiseless_channel(self):
        # f = 0: error only through coinciding codewords
        code = CodeParams(N=3, M=3)
        np.testing.assert_allclose(bc.bsc_pe_exact(code, BscParams(0.0), J=None).pe,
                                   brute_bsc(3, 3, 0.0), rtol=1e-12)

    def test_single_codeword(self):
        assert bc.bsc_pe_exact(CodeParams(N=5, M=1), BscParams(0.2)).pe == 0.0

    def test_bad_terms(self):
        with pytest.raises(DomainError):
            bc.bsc_pe_exact(CodeParams(N=5, M=4), BscParams(0.2), J=0)


class TestBscCdf:
    def test_overlap_cdf_is_binomial(self):
        for l, N in [(0, 5), (3, 7), (5000, 10_000), (2.5, 6)]:
            np.testing.assert_allclose(bc.bsc_overlap_cdf(l, N), stats.binom.cdf(l, N, 0.5),
                                       rtol=1e-13)

    def test_cond_cdf_power(self):
        code = CodeParams(N=30, M=17)
        ref = stats.binom.cdf(19, 30, 0.5) ** 16
        np.testing.assert_allclose(bc.bsc_cond_cdf_max(19, code).prob, ref, rtol=1e-12)
        assert bc.bsc_cond_cdf_max(-1, code).prob == 0.0
        assert bc.bsc_cond_cdf_max(30, code).prob == 1.0

    def test_large_nr_approximation(self):
        code = CodeParams(N=3000, R=0.5)
        # the transition region, where G moves from 0 to 1
        for l in (2650, 2670, 2690):
            e = bc.bsc_cond_cdf_max(l, code, approx=False).log_neg_log
            a = bc.bsc_cond_cdf_max(l, code, approx=True).log_neg_log
            np.testing.assert_allclose(a, e, atol=0.02)

    def test_approx_pe_close(self):
        code, chan = CodeParams(N=3000, R=0.4), BscParams(0.1)
        e = bc.bsc_pe_exact(code, chan, approx=False).log_pe
        a = bc.bsc_pe_exact(code, chan, approx=True).log_pe
        np.testing.assert_allclose(a, e, rtol=1e-2)

    def test_approx_needs_integer(self):
        with pytest.raises(DomainError):
            bc.bsc_cond_cdf_max(10.5, CodeParams(N=3000, R=0.5), approx=True)


class TestBec:
    @pytest.mark.parametrize("N,M", SMALL)
    @pytest.mark.parametrize("f", [0.1, 0.5, 0.9])
    def test_enumeration(self, N, M, f):
        r = bc.bec_pe_exact(CodeParams(N=N, M=M), BecParams(f), J=None)
        np.testing.assert_allclose(r.pe, brute_bec(N, M, f), rtol=1e-12)

    @pytest.mark.parametrize("N,M", SMALL)
    def test_pu_enumeration(self, N, M):
        np.testing.assert_allclose(bc.bec_pu(CodeParams(N=N, M=M), BecParams(0.3)),
                                   brute_bec(N, M, 0.3, "always-wrong"), rtol=1e-12)

    def test_closed_form_cdf(self):
        code = CodeParams(N=20, M=9)
        for n in (1, 4, 20):
            np.testing.assert_allclose(bc.bec_cond_cdf(n, code).prob, (1 - 2.0**-n) ** 8,
                                       rtol=1e-13)
        assert bc.bec_cond_cdf(0, code).prob == 0.0

    def test_closed_form_pu(self):
        N, M, f = 40, 2**10, 0.3
        n = np.arange(N + 1)
        w = stats.binom.pmf(n, N, 1 - f)
        ref = np.sum(w * (1 - (1 - 2.0**-n) ** (M - 1)))
        np.testing.assert_allclose(bc.bec_pu(CodeParams(N=N, M=M), BecParams(f)), ref, rtol=1e-12)

    def test_below_pu(self):
        code, chan = CodeParams(N=500, R=0.4), BecParams(0.5)
        pe = bc.bec_pe_exact(code, chan).pe
        pu = bc.bec_pu(code, chan)
        assert 0.5 * pu <= pe <= pu

    def test_domain(self):
        with pytest.raises(DomainError):
            bc.bec_cond_cdf(21, CodeParams(N=20, M=4))
        with pytest.raises(DomainError):
            BecParams(1.0)
        with pytest.raises(DomainError):
            BscParams(0.6)


def test_real_valued_codebook_size_flagged():
    r = bc.bsc_pe_exact(CodeParams(N=10, M=5.5), BscParams(0.1))
    assert r.diagnostics.get("real_M_binomial")
    assert math.isfinite(r.log_pe)
