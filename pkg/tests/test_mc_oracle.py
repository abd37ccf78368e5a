"""Simulation oracles: reproducibility, configuration, and exactness of the
semi-analytic binary path when fed every codebook."""

import itertools

import numpy as np
import pytest

from fble import mc_oracle as mc
from fble import awgn_gaussian, awgn_spherical, binary_channels
from fble._kernels import tie_profile
from fble._types import (AwgnParams, BecParams, BscParams, CapabilityError, CodeParams,
                         DomainError)


def all_codebooks(N, M):
    return np.array(list(itertools.product(range(1 << N), repeat=M)), dtype=np.int64)


def weigh(profile_mean, N, f):
    w = np.arange(N + 1)
    return float(profile_mean @ (f**w * (1 - f) ** (N - w)))


class TestConfig:
    @pytest.mark.parametrize("kw", [dict(trials=0), dict(trials=2.5), dict(seed=-1),
                                    dict(tie_policy="coin"), dict(chunk=0)])
    def test_rejects(self, kw):
        with pytest.raises(DomainError):
            mc.McConfig(**kw)

    def test_chunks_cover_trials(self):
        cfg = mc.McConfig(trials=10_001, chunk=1000)
        sizes = [n for _, n in cfg.chunks()]
        assert sum(sizes) == 10_001 and len(sizes) == 11

    def test_worker_env(self, monkeypatch):
        monkeypatch.setenv("FBLE_THREADS", "3")
        assert mc.McConfig().n_workers() == 3
        assert mc.McConfig(workers=2).n_workers() == 2


class TestReproducibility:
    def test_worker_count_invariance(self):
        code, chan = CodeParams(N=8, M=16), AwgnParams(2.0)
        a = mc.mc_spherical(code, chan, mc.McConfig(trials=20_000, seed=9, chunk=3000, workers=1))
        b = mc.mc_spherical(code, chan, mc.McConfig(trials=20_000, seed=9, chunk=3000, workers=4))
        assert a == b

    def test_seed_changes_stream(self):
        code, chan = CodeParams(N=8, M=16), AwgnParams(2.0)
        a = mc.mc_gaussian(code, chan, mc.McConfig(trials=20_000, seed=1))
        b = mc.mc_gaussian(code, chan, mc.McConfig(trials=20_000, seed=2))
        assert a != b

    def test_binary_profiles_invariant(self):
        code = CodeParams(N=6, M=4)
        a = mc.binary_profiles(code, "bsc", mc.McConfig(trials=500, seed=4, chunk=64, workers=1))
        b = mc.binary_profiles(code, "bsc", mc.McConfig(trials=500, seed=4, chunk=64, workers=3))
        np.testing.assert_array_equal(a, b)


class TestEdges:
    def test_single_codeword(self):
        cfg = mc.McConfig(trials=1000)
        assert mc.mc_spherical(CodeParams(N=4, M=1), AwgnParams(1.0), cfg) == (0.0, 0.0)
        assert mc.mc_gaussian(CodeParams(N=4, M=1), AwgnParams(1.0), cfg) == (0.0, 0.0)
        assert mc.mc_bsc_semianalytic(CodeParams(N=4, M=1), BscParams(0.1), cfg) == (0.0, 0.0)

    def test_too_few_trials(self):
        with pytest.raises(DomainError):
            mc.mc_spherical(CodeParams(N=4, M=4), AwgnParams(1.0), mc.McConfig(trials=999))

    def test_enumeration_limit(self):
        with pytest.raises(CapabilityError):
            mc.mc_bsc_semianalytic(CodeParams(N=25, M=2), BscParams(0.1), mc.McConfig(trials=10))

    def test_non_integer_size(self):
        with pytest.raises(DomainError):
            mc.mc_gaussian(CodeParams(N=4, M=2.5), AwgnParams(1.0), mc.McConfig(trials=1000))


class TestTieProfileExact:
    """Averaging the profile over every codebook gives the ensemble value exactly."""

    @pytest.mark.parametrize("N,M", [(2, 3), (3, 3), (4, 2), (2, 5)])
    def test_bsc_policies(self, N, M):
        books = all_codebooks(N, M)
        code, chan = CodeParams(N=N, M=M), BscParams(0.2)
        lo, up = binary_channels.bsc_pe_bounds(code, chan)
        exact = binary_channels.bsc_pe_exact(code, chan, J=None).pe
        for pol, ref in ((0, exact), (1, up), (2, lo)):
            prof = tie_profile(books, N, 0, pol).mean(axis=0)
            np.testing.assert_allclose(weigh(prof, N, 0.2), ref, rtol=1e-12)

    @pytest.mark.parametrize("N,M", [(2, 3), (3, 3), (4, 2)])
    def test_bec_policies(self, N, M):
        books = all_codebooks(N, M)
        code, chan = CodeParams(N=N, M=M), BecParams(0.4)
        exact = binary_channels.bec_pe_exact(code, chan, J=None).pe
        pu = binary_channels.bec_pu(code, chan)
        for pol, ref in ((0, exact), (1, pu)):
            prof = tie_profile(books, N, 1, pol).mean(axis=0)
            np.testing.assert_allclose(weigh(prof, N, 0.4), ref, rtol=1e-12)
        assert np.all(tie_profile(books, N, 1, 2) == 0.0)


class TestAgreement:
    def test_spherical(self):
        code, chan = CodeParams(N=4, M=4), AwgnParams(1.0)
        est, se = mc.mc_spherical(code, chan, mc.McConfig(trials=200_000, seed=11))
        assert abs(est - awgn_spherical.pe_exact(code, chan).pe) < 4 * se

    def test_gaussian(self):
        code, chan = CodeParams(N=4, M=4), AwgnParams(1.0)
        est, se = mc.mc_gaussian(code, chan, mc.McConfig(trials=200_000, seed=12))
        assert abs(est - awgn_gaussian.pe_exact_gaussian(code, chan).pe) < 4 * se

    def test_bec(self):
        code, chan = CodeParams(N=10, M=4), BecParams(0.5)
        est, se = mc.mc_bec_semianalytic(code, chan, mc.McConfig(trials=20_000, seed=13))
        assert abs(est - binary_channels.bec_pe_exact(code, chan, J=None).pe) < 4 * se
