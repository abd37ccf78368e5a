"""I.i.d. uniform binary codes on the BSC and the BEC.

Metrics are discrete, so ties between the transmitted and wrong codewords
have positive probability; the exact error probability resolves them by
a fair guess among the tied candidates.  Each row of the outer binomial
sum (overlap ``i`` for the BSC, unerased count ``n`` for the BEC) is
reduced to three numbers:

* ``F = p + q`` -- probability one wrong codeword does not beat the
  transmitted one,
* ``p`` -- probability it ties,
* ``q`` -- probability it is strictly worse,

and the row error for ``J`` guessing terms is evaluated as a sum of
positive contributions so that small error probabilities keep full
relative accuracy.
"""

from __future__ import annotations

import math

import numpy as np
from scipy import stats

from ._types import (LN2, BecParams, BscParams, CodeParams, DomainError, EvalOptions, LogProb,
                     PeResult)
from .specfun import (_kernels, log1m_exp_neg_exp, log1mexp, log_binom_row,
                      log_binomial_weights, log_neg_log1m)

APPROX_NR = 1000.0
TERM_RTOL = 1e-17
MAX_EXTRA_TERMS = 400


# ---------------------------------------------------------------------------
# overlap distribution
# ---------------------------------------------------------------------------

def _log_binom_cdf_half(N: int):
    """``(ln P[L <= i], ln P[L > i])`` for ``L ~ Binomial(N, 1/2)``, ``i = 0..N``."""
    lp = log_binom_row(N) - N * LN2
    lcdf = np.logaddexp.accumulate(lp)
    lsf = np.empty(N + 1)
    lsf[-1] = -np.inf
    if N > 0:
        lsf[:-1] = np.logaddexp.accumulate(lp[::-1])[::-1][1:]
    # Incomplete-beta values where representable; the running log-sums
    # accumulate roundoff over long rows and only serve the deep tails.
    k = np.arange(N + 1, dtype=float)
    with np.errstate(divide="ignore"):
        c, cc = stats.binom.cdf(k, N, 0.5), stats.binom.sf(k, N, 0.5)
        lcdf = np.where(c > 1e-290, np.log(c), lcdf)
        lsf = np.where(cc > 1e-290, np.log(cc), lsf)
    # Read each tail from the side where it is the smaller one.
    lcdf, lsf = np.minimum(lcdf, 0.0), np.minimum(lsf, 0.0)
    lcdf = np.where(lsf < -LN2, log1mexp(lsf), lcdf)
    lsf = np.where(lcdf < -LN2, log1mexp(lcdf), lsf)
    return lp, np.minimum(lcdf, 0.0), np.minimum(lsf, 0.0)


def bsc_overlap_cdf(l: float, N: int) -> float:
    """CDF of the Boolean overlap between two independent uniform words."""
    if not 0 <= l <= N:
        raise DomainError(f"overlap must lie in [0, N], got {l}")
    _, lcdf, lsf = _log_binom_cdf_half(int(N))
    k = int(math.floor(l))
    return float(np.exp(lcdf[k])) if lcdf[k] < -LN2 else float(-np.expm1(lsf[k]))


def _lnneglog_F(lcdf, lsf):
    """``ln(-ln F)`` from both tails of ``F``."""
    with np.errstate(divide="ignore"):
        return np.where(lcdf < -LN2, np.log(-lcdf), log_neg_log1m(lsf))


def _bsc_lnneglog_G_approx(l, N, log_m1):
    """Large-``NR`` form of ``ln(-ln P_l(l)**(M-1))`` for integer ``l``.

    First-order Taylor expansion of the upper binomial tail around the
    integration end point:
    ``P[L > l] ~ 2**-N (N+1) / ((l+1)(l+2) B(l+1, N-l))``.
    """
    l = np.asarray(l, dtype=float)
    out = np.full(l.shape, -np.inf)
    inner = (l >= 0) & (l < N)
    for idx in zip(*np.nonzero(inner)):
        li = l[idx]
        out[idx] = (log_m1 - N * LN2 + math.log(N + 1.0) - math.log((li + 1.0) * (li + 2.0))
                    - _kernels.log_beta(li + 1.0, N - li))
    out = np.where(l < 0, np.inf, out)
    return out


def _bsc_lnneglog_G(N, log_m1, approx):
    """``ln(-ln G(i))`` for ``i = -1..N`` with ``G(i) = P_l(i)**(M-1)``."""
    i = np.arange(-1, N + 1, dtype=float)
    if approx:
        return _bsc_lnneglog_G_approx(i, N, log_m1)
    _, lcdf, lsf = _log_binom_cdf_half(N)
    lnl = log_m1 + _lnneglog_F(lcdf, lsf)
    return np.concatenate([[np.inf], lnl])


def bsc_cond_cdf_max(l: float, code: CodeParams, approx: bool | None = None) -> LogProb:
    """CDF of the largest wrong-codeword overlap, ``P_l(l)**(M-1)``.

    ``approx`` selects the large-``NR`` Taylor form (integer ``l`` only);
    by default it is used when ``NR > 1000``.
    """
    N = code.N
    if approx is None:
        approx = code.NR > APPROX_NR
    if code.log2_M == 0.0:
        return LogProb(0.0, -math.inf)
    if l < 0:
        return LogProb(-math.inf, math.inf)
    if l >= N:
        return LogProb(0.0, -math.inf)
    if approx:
        if l != int(l):
            raise DomainError("the large-NR approximation needs an integer overlap")
        lnl = float(_bsc_lnneglog_G_approx(np.array([l]), N, code.log_M_minus_1)[0])
    else:
        k = int(math.floor(l))
        lnl = float(_bsc_lnneglog_G(N, code.log_M_minus_1, False)[k + 1])
    return LogProb.from_log_neg_log(lnl)


def bsc_pe_bounds(code: CodeParams, chan: BscParams, approx: bool | None = None):
    """``(P_l, P_u)``: ties always resolved correctly / always wrongly."""
    lo, up = _bsc_bounds_log(code, chan, approx)
    return math.exp(lo), math.exp(up)


def _bsc_bounds_log(code, chan, approx=None):
    N = code.N
    if code.log2_M == 0.0:
        return -math.inf, -math.inf
    if approx is None:
        approx = code.NR > APPROX_NR
    lw = log_binomial_weights(N, 1.0 - chan.f)
    lnl = _bsc_lnneglog_G(N, code.log_M_minus_1, approx)
    l1m = log1m_exp_neg_exp(lnl)
    lower = _lse(lw + l1m[1:])
    upper = _lse(lw + l1m[:-1])
    return min(lower, 0.0), min(upper, 0.0)


def _lse(a):
    a = np.asarray(a, dtype=float)
    m = np.max(a)
    if not np.isfinite(m):
        return float(m)
    return float(math.log(np.sum(np.exp(a - m))) + m)


# ---------------------------------------------------------------------------
# guessing-corrected row errors
# ---------------------------------------------------------------------------

def _log_binom_m1(code: CodeParams, jmax: int):
    """``ln C(M-1, j)`` for ``j = 0..jmax`` with real ``M``."""
    log_m1 = code.log_M_minus_1
    k = np.arange(jmax, dtype=float)
    if code.log2_M < 50:
        m1 = code.size - 1.0
        with np.errstate(divide="ignore", invalid="ignore"):
            fac = np.log(m1 - k)
        fac = np.where(m1 - k > 0, fac, -np.inf)
    else:
        fac = log_m1 + np.log1p(-k * math.exp(-log_m1))
    lg = np.concatenate([[0.0], np.cumsum(fac) - np.cumsum(np.log(k + 1.0))])
    return np.where(np.isnan(lg), -np.inf, lg)


def _row_errors(code: CodeParams, log_p, log_q, lnneg_qpow, lnneg_Fpow, J):
    """Log of the per-row error with ``J`` guessing terms.

    ``ln(-ln q**(M-1))`` and ``ln(-ln F**(M-1))`` carry the two powers.
    The row error is
    ``(1 - F**(M-1)) + sum_{1<=j<J} t_j j/(j+1) + sum_{j>=J} t_j`` with
    ``t_j = C(M-1, j) p**j q**(M-1-j)``, summed until the terms are past
    their peak and negligible.  Returns ``(log_err, J_used)``.
    """
    M = code.size
    m1 = M - 1.0
    if J is None or (code.is_integer_size and J >= M):
        J_eff = math.inf
    else:
        J_eff = int(J)
    if J_eff == 1:
        # Every tie counted as an error: 1 - q**(M-1).
        return log1m_exp_neg_exp(lnneg_qpow), 1
    rows = len(log_p)
    with np.errstate(over="ignore"):
        lqpow = -np.exp(lnneg_qpow)
    cap = (J_eff if math.isfinite(J_eff) else 1) + MAX_EXTRA_TERMS
    if math.isfinite(m1):
        cap = int(min(cap, m1 + 1))
    lc = _log_binom_m1(code, cap)
    qzero = ~np.isfinite(log_q)

    running = log1m_exp_neg_exp(lnneg_Fpow)
    direct = []
    prev = np.full(rows, -np.inf)
    converged = qzero.copy()
    if qzero.any():
        # q = 0: the only surviving term has all M-1 wrong codewords tied.
        with np.errstate(over="ignore"):
            lGF = -np.exp(lnneg_Fpow[qzero])
        frac = math.log(m1 / M) if (math.isfinite(m1) and J_eff > m1) else 0.0
        running[qzero] = np.logaddexp(log1m_exp_neg_exp(lnneg_Fpow[qzero]), lGF + frac)
    used = 1
    for j in range(cap):
        with np.errstate(invalid="ignore"):
            lt = lc[j] + j * log_p + np.where(qzero, 0.0, lqpow - j * log_q)
        lt = np.where(qzero | np.isnan(lt), -np.inf, lt)
        if j < J_eff:
            direct.append(lt - math.log1p(j))
        if j >= 1:
            w = math.log(j / (j + 1.0)) if j < J_eff else 0.0
            running = np.where(converged, running, np.logaddexp(running, lt + w))
            small = lt < running + math.log(TERM_RTOL)
            converged |= (lt <= prev) & small
            if j < J_eff:
                used = j + 1
            if converged.all():
                break
        prev = lt
    if converged.all():
        return np.minimum(running, 0.0), used
    # Rows still climbing carry many ties and a large error: use the
    # complementary form, exact for this J.
    if math.isfinite(J_eff) and len(direct) >= J_eff:
        ls = np.logaddexp.reduce(np.array(direct), axis=0)
        fallback = log1mexp(np.minimum(ls, 0.0))
    else:
        # All M terms: sum_j t_j/(1+j) = (F**M - q**M) / (M p).
        scale = 1.0 if not math.isfinite(m1) else M / m1
        with np.errstate(over="ignore"):
            lFM = -np.exp(lnneg_Fpow) * scale
            lqM = lqpow * scale
        with np.errstate(invalid="ignore"):
            ls = lFM + log1mexp(np.minimum(lqM - lFM, 0.0)) - code.log2_M * LN2 - log_p
        fallback = log1mexp(np.minimum(ls, 0.0))
        used = int(min(cap, m1 + 1)) if math.isfinite(m1) else cap
    out = np.where(converged, running, fallback)
    return np.minimum(out, 0.0), used


def _pe_from_rows(lw, log_err):
    return min(_lse(lw + log_err), 0.0)


# ---------------------------------------------------------------------------
# BSC
# ---------------------------------------------------------------------------

def bsc_pe_exact(code: CodeParams, chan: BscParams, J: int | None = 16,
                 approx: bool | None = None) -> PeResult:
    """Exact ensemble-average block error probability on the BSC.

    ``J`` guessing terms; ``None`` uses all ``M``.  With ``J < M`` the
    result is an upper bound, equal to ``P_u`` for ``J = 1``.
    """
    N = code.N
    if code.log2_M == 0.0:
        return PeResult(pe=0.0, method="bsc-exact", log_pe=-math.inf)
    if J is not None and J < 1:
        raise DomainError(f"J must be >= 1, got {J}")
    if approx is None:
        approx = code.NR > APPROX_NR
    lw = log_binomial_weights(N, 1.0 - chan.f)
    lnl = _bsc_lnneglog_G(N, code.log_M_minus_1, approx)
    lp, lcdf, lsf = _log_binom_cdf_half(N)
    # Row i: tie probability p = pmf(i), strictly-worse q = P_l(i-1).
    log_q = np.concatenate([[-np.inf], lcdf[:-1]])
    res, used = _row_errors(code, lp, log_q, lnl[:-1], lnl[1:], J)
    lpe = _pe_from_rows(lw, res)
    diag = {"approx_cdf": bool(approx)}
    if J is not None and J > 1 and not code.is_integer_size:
        diag["real_M_binomial"] = True
    return PeResult(pe=math.exp(lpe), log_pe=lpe, method="bsc-exact",
                    is_lower_bound=False, J_used=used, diagnostics=diag)


# ---------------------------------------------------------------------------
# BEC
# ---------------------------------------------------------------------------

def _bec_lnneglog(n, log_m1):
    """``ln(-(M-1) ln(1 - 2**-n))`` for an array of unerased counts."""
    n = np.asarray(n, dtype=float)
    return log_m1 + log_neg_log1m(-n * LN2)


def bec_cond_cdf(n: int, code: CodeParams) -> LogProb:
    """``(1 - 2**-n)**(M-1)``: no wrong codeword matches all ``n`` unerased symbols."""
    if not 0 <= n <= code.N:
        raise DomainError(f"unerased count must lie in [0, N], got {n}")
    if code.log2_M == 0.0:
        return LogProb(0.0, -math.inf)
    if n == 0:
        return LogProb(-math.inf, math.inf)
    return LogProb.from_log_neg_log(float(_bec_lnneglog(np.array([n]), code.log_M_minus_1)[0]))


def bec_pu(code: CodeParams, chan: BecParams) -> float:
    """Average block erasure probability (every tie counted as an error)."""
    if code.log2_M == 0.0:
        return 0.0
    N = code.N
    lw = log_binomial_weights(N, 1.0 - chan.f)
    lnl = _bec_lnneglog(np.arange(N + 1), code.log_M_minus_1)
    return math.exp(_pe_from_rows(lw, log1m_exp_neg_exp(lnl)))


def bec_pe_exact(code: CodeParams, chan: BecParams, J: int | None = 16) -> PeResult:
    """Exact ensemble-average block error probability on the BEC."""
    N = code.N
    if code.log2_M == 0.0:
        return PeResult(pe=0.0, method="bec-exact", log_pe=-math.inf)
    if J is not None and J < 1:
        raise DomainError(f"J must be >= 1, got {J}")
    n = np.arange(N + 1, dtype=float)
    lw = log_binomial_weights(N, 1.0 - chan.f)
    log_p = -n * LN2
    log_q = log1mexp(log_p)
    lnl = _bec_lnneglog(n, code.log_M_minus_1)
    res, used = _row_errors(code, log_p, log_q, lnl, np.full(N + 1, -np.inf), J)
    lpe = _pe_from_rows(lw, res)
    diag = {}
    if J is not None and J > 1 and not code.is_integer_size:
        diag["real_M_binomial"] = True
    return PeResult(pe=math.exp(lpe), log_pe=lpe, method="bec-exact", J_used=used,
                    diagnostics=diag)
