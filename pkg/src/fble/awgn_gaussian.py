"""I.i.d. Gaussian code ensemble on the AWGN channel.

Codeword entries are Normal(0, P).  Conditioned on the received word
``r``, the normalized squared distance ``|w - r|**2 / P`` of any wrong
codeword is noncentral chi-square with ``N`` degrees of freedom and
noncentrality ``Y = |r|**2 / P``; the transmitted codeword's distance
``Z = |r - c|**2 / P`` satisfies ``Z (P + 1) ~ ncx2(N, Y / (P + 1))``.
The error probability is therefore a two-level expectation over ``Y``
and ``Z`` of ``1 - (1 - C(Z; Y))**(M-1)``, with ``C`` the ncx2 CDF.
"""

from __future__ import annotations

import math

import numpy as np
from scipy import optimize, stats

from ._types import CapabilityError, CodeParams, DomainError, EvalOptions, NumericalError, PeResult
from .quadrature import panel_nodes
from .specfun import log1m_exp_neg_exp, log_chi_pdf, log_neg_log1m, marcum_q, ncx2_logcdf, ncx2_logpdf

EXACT_NR_CAP = 1023.0


def cond_cdf_distance(d: float, r_norm: float, N: int, P: float) -> float:
    """Probability that one wrong codeword lies within normalized squared
    distance ``d`` of a received word of norm ``r_norm``."""
    if d < 0 or r_norm < 0:
        raise DomainError("distance and norm must be nonnegative")
    if not P > 0:
        raise DomainError(f"power must be positive, got {P}")
    if d == 0.0:
        return 0.0
    if math.isinf(d):
        return 1.0
    return 1.0 - marcum_q(0.5 * N, r_norm / math.sqrt(P), math.sqrt(d))


def _log_H(z, lam, N, log_m1):
    """``ln[1 - (1 - C)**(M-1)]`` with ``C`` the ncx2(N, lam) CDF at ``z``."""
    lc, _ = ncx2_logcdf(z, N, lam, upper=False)
    return log1m_exp_neg_exp(log_m1 + log_neg_log1m(lc))


def _wall(lam, N, log_m1, z_hint):
    """``z`` where ``(M-1) C(z) = ln 2``, i.e. the error wall."""
    target = math.log(math.log(2.0)) - log_m1

    def g(lz):
        return float(ncx2_logcdf(np.array([math.exp(lz)]), N, lam, upper=False)[0][0]) - target

    lo, hi = math.log(max(z_hint, 1e-3)) - 1.0, math.log(max(z_hint, 1e-3)) + 1.0
    for _ in range(200):
        if g(lo) < 0:
            break
        lo -= 2.0
    for _ in range(200):
        if g(hi) > 0:
            break
        hi += 1.0
    if not (g(lo) < 0 < g(hi)):
        return None
    return math.exp(optimize.brentq(g, lo, hi, xtol=1e-10))


def _graded(center, width, lo, hi, basic):
    pts = [center]
    w = width
    while w < 8 * basic:
        pts += [center - w, center + w]
        w *= 2.0
    pts = np.array(pts)
    return pts[(pts > lo) & (pts < hi)]


def _row_log_integral(u, N, P, log_m1, tail, panels_per_sd):
    """``ln E[H | U = u]`` over the transmitted-codeword distance, with its
    embedded Kronrod/Gauss estimate; ``U = |r|**2 / (P + 1)``.

    Integrates in ``y = sqrt(X)``, ``X = Z (P + 1)``, whose spread is close
    to one for all degrees of freedom and noncentralities.
    """
    lam_x = u / P                 # noncentrality of X
    lam_w = u * (P + 1.0) / P     # noncentrality of the wrong-codeword distance
    dist = stats.ncx2(N, lam_x)
    y_lo, y_hi = math.sqrt(float(dist.ppf(tail))), math.sqrt(float(dist.isf(tail)))
    basic = 1.0 / panels_per_sd
    zw = _wall(lam_w, N, log_m1, (N + lam_w) * 0.5)
    breaks = [y_lo, y_hi]
    if zw is not None:
        yw = math.sqrt(zw * (P + 1.0))
        lc = float(ncx2_logcdf(np.array([zw]), N, lam_w, upper=False)[0][0])
        lp = float(ncx2_logpdf(np.array([zw]), N, lam_w)[0])
        # e-folding length of C at the wall, mapped to y.
        width = math.exp(lc - lp) * (P + 1.0) / (2.0 * yw)
        if yw > y_hi:
            # Wall beyond the bulk: the row is a tail integral of the density.
            y_hi = yw + 40.0 * max(width, basic)
        breaks += _graded(yw, width / 4.0, y_lo, y_hi, basic).tolist()
    n = max(4, int(math.ceil((y_hi - y_lo) / basic)))
    breaks += np.linspace(y_lo, y_hi, n + 1).tolist()
    br = np.unique(np.array(breaks))
    br = br[(br >= y_lo) & (br <= y_hi)]
    y, wk, wg = panel_nodes(br)
    x = y * y
    with np.errstate(divide="ignore"):
        lf = ncx2_logpdf(x, N, lam_x) + np.log(2.0 * y) + _log_H(x / (P + 1.0), lam_w, N, log_m1)
    peak = float(np.max(lf))
    if not np.isfinite(peak):
        return -math.inf, -math.inf
    e = np.exp(lf - peak)
    with np.errstate(divide="ignore"):
        return math.log(np.dot(wk, e)) + peak, math.log(max(np.dot(wg, e), 0.0)) + peak


def pe_exact_gaussian(code: CodeParams, chan, opts: EvalOptions | None = None,
                      tail: float = 1e-30, panels_per_sd: float = 0.75,
                      outer_tail: float = 1e-20, outer_width: float = 2.0) -> PeResult:
    """Ensemble-average block error probability of the i.i.d. Gaussian ensemble.

    ``tail`` and ``outer_tail`` set the probability mass dropped from the
    inner and outer windows; ``panels_per_sd`` and ``outer_width`` set the
    Kronrod panel widths relative to the local spread.
    """
    opts = opts or EvalOptions()
    N = code.N
    if N < 2:
        raise DomainError("Gaussian ensemble needs N >= 2")
    if code.log2_M <= 0.0:
        return PeResult(pe=0.0, method="exact-gaussian", log_pe=-math.inf)
    if code.NR > EXACT_NR_CAP:
        raise CapabilityError(f"Gaussian ensemble supports NR <= {EXACT_NR_CAP:g}")
    P = chan.P
    log_m1 = code.log_M_minus_1
    # Outer variable sqrt(U), U = |r|**2 / (P + 1) ~ chi-square(N); its
    # spread stays near 1/sqrt(2) for every N.
    outer = stats.chi(N)
    c_lo, c_hi = float(outer.ppf(outer_tail)), float(outer.isf(outer_tail))
    n_u = max(4, int(math.ceil((c_hi - c_lo) / (outer_width * math.sqrt(0.5)))))
    c, wk, wg = panel_nodes(np.linspace(c_lo, c_hi, n_u + 1))
    rows_k = np.empty(len(c))
    rows_g = np.empty(len(c))
    for i, ci in enumerate(c):
        rows_k[i], rows_g[i] = _row_log_integral(ci * ci, N, P, log_m1, tail, panels_per_sd)
    lpdf = log_chi_pdf(c, N)
    with np.errstate(divide="ignore"):
        lk = float(np.logaddexp.reduce(np.log(wk) + lpdf + rows_k))
        lk_g_inner = float(np.logaddexp.reduce(np.log(wk) + lpdf + rows_g))
        lg_outer = float(np.logaddexp.reduce(np.log(wg) + lpdf + rows_k))
    if not np.isfinite(lk):
        return PeResult(pe=0.0, method="exact-gaussian", log_pe=-math.inf, quad_order=15)
    rel = abs(math.expm1(lk_g_inner - lk)) + abs(math.expm1(lg_outer - lk))
    if rel > max(1e3 * opts.tol, 1e-6):
        raise NumericalError("Gaussian-ensemble integral did not reach tolerance",
                             residual=rel, estimate=math.exp(lk))
    lk = min(lk, 0.0)
    return PeResult(pe=math.exp(lk), log_pe=lk, method="exact-gaussian", rel_err_est=rel,
                    quad_order=15, diagnostics={"outer_panels": n_u, "outer_nodes": len(c)})
