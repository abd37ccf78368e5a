"""Simulation and semi-analytic oracles for ensemble-averaged error rates.

Every estimator draws from counter-based Philox streams keyed by
``(seed, chunk index)``.  Chunk boundaries depend only on the configured
chunk size, so estimates are bit-identical whatever the worker count.

The AWGN estimators sample sufficient statistics rather than whole
codebooks.  They do not use the analytic machinery:

* spherical: a wrong codeword is uniform on the sphere, so its cosine
  with the received direction is ``x1 / sqrt(x1**2 + chi2(N-1))``.  The
  transmitted codeword's cosine comes from the noise components along
  and across it.
* Gaussian: given ``Y = |r|**2 / P``, the normalized squared distance
  of a wrong codeword is ncx2(N, Y).

For the binary channels every noise pattern is enumerated exactly for
each sampled codebook, so only codebook sampling adds variance.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from ._kernels import tie_profile
from ._types import AwgnParams, BecParams, BscParams, CapabilityError, CodeParams, DomainError

TIE_POLICIES = {"uniform": 0, "always-wrong": 1, "always-right": 2}
MAX_ENUM_N = 24


@dataclass(frozen=True)
class McConfig:
    """Trials (or codebooks), stream seed and tie model.

    ``chunk`` fixes the stream partition; ``workers`` only changes
    scheduling (``None`` reads ``FBLE_THREADS``).
    """

    trials: int = 10**6
    seed: int = 0
    tie_policy: str = "uniform"
    chunk: int = 1 << 16
    workers: int | None = None

    def __post_init__(self):
        if int(self.trials) != self.trials or self.trials < 1:
            raise DomainError(f"trials must be a positive integer, got {self.trials}")
        if not 0 <= int(self.seed) < 2**64:
            raise DomainError("seed must be a 64-bit unsigned integer")
        if self.tie_policy not in TIE_POLICIES:
            raise DomainError(f"tie_policy must be one of {sorted(TIE_POLICIES)}")
        if self.chunk < 1:
            raise DomainError("chunk must be positive")

    def generator(self, stream: int) -> np.random.Generator:
        return np.random.Generator(np.random.Philox(np.random.SeedSequence([int(self.seed), stream])))

    def chunks(self):
        n, c = int(self.trials), int(self.chunk)
        return [(i, min(c, n - i * c)) for i in range((n + c - 1) // c)]

    def n_workers(self) -> int:
        if self.workers is not None:
            return max(1, int(self.workers))
        env = os.environ.get("FBLE_THREADS")
        if env:
            return max(1, int(env))
        return os.cpu_count() or 1


def _map_chunks(cfg: McConfig, fn):
    """Apply ``fn(rng, size)`` to each chunk; results in chunk order."""
    jobs = cfg.chunks()
    run = lambda job: fn(cfg.generator(job[0]), job[1])
    workers = min(cfg.n_workers(), len(jobs))
    if workers <= 1:
        return [run(j) for j in jobs]
    with ThreadPoolExecutor(workers) as pool:
        return list(pool.map(run, jobs))


def _integer_M(code: CodeParams) -> int:
    if not code.is_integer_size:
        raise DomainError("simulation needs an integer codebook size")
    return int(round(code.size))


def _binomial(errors: int, n: int):
    p = errors / n
    return p, math.sqrt(p * (1.0 - p) / n)


def mc_spherical(code: CodeParams, chan: AwgnParams, cfg: McConfig):
    """Error rate of maximum-correlation decoding over the spherical ensemble."""
    M = _integer_M(code)
    N = code.N
    if M < 2:
        return 0.0, 0.0
    if N < 2:
        raise DomainError("spherical ensemble needs N >= 2")
    if cfg.trials < 1000:
        raise DomainError("at least 1000 trials required")
    amp = math.sqrt(N * chan.P)

    def chunk(rng, n):
        # Received word r = amp e1 + z; its cosine with the transmitted word.
        along = amp + rng.standard_normal(n)
        cos0 = along / np.sqrt(along * along + rng.chisquare(N - 1, n))
        x1 = rng.standard_normal((n, M - 1))
        cos_w = x1 / np.sqrt(x1 * x1 + rng.chisquare(N - 1, (n, M - 1)))
        return int(np.count_nonzero(cos_w.max(axis=1) > cos0))

    return _binomial(sum(_map_chunks(cfg, chunk)), int(cfg.trials))


def mc_gaussian(code: CodeParams, chan: AwgnParams, cfg: McConfig):
    """Error rate of minimum-distance decoding over the i.i.d. Gaussian ensemble."""
    M = _integer_M(code)
    N = code.N
    if M < 2:
        return 0.0, 0.0
    if cfg.trials < 1000:
        raise DomainError("at least 1000 trials required")
    P = chan.P

    def chunk(rng, n):
        c = rng.standard_normal((n, N)) * math.sqrt(P)
        z = rng.standard_normal((n, N))
        d0 = np.einsum("ij,ij->i", z, z) / P
        r = c + z
        y = np.einsum("ij,ij->i", r, r) / P
        dw = rng.noncentral_chisquare(N, np.repeat(y[:, None], M - 1, axis=1))
        return int(np.count_nonzero(dw.min(axis=1) < d0))

    return _binomial(sum(_map_chunks(cfg, chunk)), int(cfg.trials))


def binary_profiles(code: CodeParams, channel: str, cfg: McConfig) -> np.ndarray:
    """Per-codebook conditional error mass by noise weight.

    Row ``k``, column ``w`` sums the conditional error over all noise
    patterns with ``w`` flips (BSC) or erasures (BEC).  Independent of the
    channel parameter, so one profile serves every ``f``.
    """
    M = _integer_M(code)
    N = code.N
    if N > MAX_ENUM_N:
        raise CapabilityError(f"exhaustive noise enumeration limited to N <= {MAX_ENUM_N}")
    ch = {"bsc": 0, "bec": 1}[channel]
    pol = TIE_POLICIES[cfg.tie_policy]

    def chunk(rng, n):
        words = rng.integers(0, 1 << N, size=(n, M), dtype=np.int64)
        return tie_profile(words, N, ch, pol)

    return np.concatenate(_map_chunks(cfg, chunk), axis=0)


def estimate_from_profiles(profiles: np.ndarray, f: float):
    """Mean and standard error of the per-codebook Pe at noise level ``f``."""
    N = profiles.shape[1] - 1
    w = np.arange(N + 1)
    weights = np.power(f, w) * np.power(1.0 - f, N - w)
    pe = profiles @ weights
    n = len(pe)
    se = float(np.std(pe, ddof=1) / math.sqrt(n)) if n > 1 else 0.0
    return float(np.mean(pe)), se


def mc_bsc_semianalytic(code: CodeParams, chan: BscParams, cfg: McConfig):
    """Codebook-sampled BSC error rate with exact noise enumeration."""
    if code.log2_M <= 0.0:
        return 0.0, 0.0
    return estimate_from_profiles(binary_profiles(code, "bsc", cfg), chan.f)


def mc_bec_semianalytic(code: CodeParams, chan: BecParams, cfg: McConfig):
    """Codebook-sampled BEC error rate with exact erasure enumeration."""
    if code.log2_M <= 0.0:
        return 0.0, 0.0
    return estimate_from_profiles(binary_profiles(code, "bec", cfg), chan.f)
