"""Uniform spherical code ensemble on the AWGN channel.

Codewords are uniform on the sphere of radius ``sqrt(N P)``; the noise has
unit variance per dimension.  Decoding errs when the largest correlation
coefficient ``varrho`` among the ``M - 1`` wrong codewords exceeds the
cosine of the angle between the received word and the transmitted one.

All CDFs of ``varrho`` are carried as ``ln(-ln G)`` so that ``M`` may be
far beyond the float range.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import optimize, stats

from ._types import (LN2, CapabilityError, CodeParams, DomainError, EvalOptions, LogProb,
                     NumericalError, PeResult)
from .quadrature import adaptive_integrate, panel_nodes
from .specfun import (inv_reg_inc_beta_log, log1m_exp_neg_exp, log1mexp, log_beta,
                      log_chi_pdf, log_neg_log1m, log_reg_inc_beta, noncentral_t_logcdf,
                      noncentral_t_logpdf)

EXACT_NR_CAP = 1023.0
APPROX_MIN_NR = 40.0
LN_SQRT_2PI = 0.5 * math.log(2.0 * math.pi)


def _check_code(code: CodeParams):
    if code.N < 2:
        raise DomainError("spherical ensemble needs N >= 2")


# ---------------------------------------------------------------------------
# CDF of the largest wrong-codeword correlation
# ---------------------------------------------------------------------------

def _lnneglog_G_exact(v, N, log_m1):
    """``(ln(-ln G), ln(1 - G))`` of the exact CDF ``G`` at ``v`` (array)."""
    v = np.asarray(v, dtype=float)
    a = 0.5 * (N - 1)
    lo, _ = log_reg_inc_beta(a, 0.5, (1.0 - v) * (1.0 + v), v * v)
    half = lo - LN2
    pos = v >= 0
    with np.errstate(divide="ignore", invalid="ignore"):
        # v >= 0: G = (1 - u)**(M-1), u = tail mass above v.
        lnl_pos = log_m1 + log_neg_log1m(np.where(pos, half, -np.inf))
        # v < 0: G = F**(M-1) with F = half-tail below v.
        lnl_neg = log_m1 + np.log(-np.where(pos, -1.0, half))
    lnl = np.where(pos, lnl_pos, lnl_neg)
    return lnl, log1m_exp_neg_exp(lnl)


def _lnneglog_G_approx(v, N, log2_M):
    """Large-``NR`` form of ``ln(-ln G)``; ``v <= 0`` maps to ``G = 0``."""
    v = np.asarray(v, dtype=float)
    c = log2_M * LN2 - math.log(N) - log_beta(0.5, 0.5 * (N + 1))
    with np.errstate(divide="ignore", invalid="ignore"):
        lnl = c + 0.5 * (N - 1) * np.log((1.0 - v) * (1.0 + v)) - np.log(v)
    lnl = np.where(v > 0, lnl, np.inf)
    l1m = np.where(v > 0, log1m_exp_neg_exp(np.where(v > 0, lnl, 0.0)), 0.0)
    return lnl, l1m


def cond_cdf_rho_max(varrho: float, code: CodeParams) -> LogProb:
    """CDF of the largest wrong-codeword correlation, exact, in log form."""
    _check_code(code)
    if not -1.0 <= varrho <= 1.0:
        raise DomainError(f"correlation must lie in [-1, 1], got {varrho}")
    lnl, _ = _lnneglog_G_exact(np.array([varrho]), code.N, code.log_M_minus_1)
    return LogProb.from_log_neg_log(float(lnl[0]))


def cond_cdf_rho_max_approx(varrho: float, code: CodeParams) -> LogProb:
    """Beta-bound approximation of the same CDF, for ``NR >= 40``."""
    _check_code(code)
    if code.NR < APPROX_MIN_NR:
        raise DomainError(f"approximation needs NR >= {APPROX_MIN_NR}, got {code.NR}")
    if not 0.0 < varrho <= 1.0:
        raise DomainError(f"approximation needs 0 < varrho <= 1, got {varrho}")
    lnl, _ = _lnneglog_G_approx(np.array([varrho]), code.N, code.log2_M)
    return LogProb.from_log_neg_log(float(lnl[0]))


def _resolve_method(code: CodeParams, opts: EvalOptions) -> str:
    method = opts.method
    if method == "auto":
        return "exact" if code.NR <= opts.exact_nr_limit else "approx"
    if method == "exact":
        if code.NR > EXACT_NR_CAP:
            raise CapabilityError(
                f"exact CDF path supports NR <= {EXACT_NR_CAP:g}, got {code.NR:g}; "
                "use the approximation")
        return "exact"
    if method == "approx":
        if code.NR < APPROX_MIN_NR:
            raise DomainError(f"approximation needs NR >= {APPROX_MIN_NR}, got {code.NR}")
        return "approx"
    raise DomainError(f"unknown CDF method {method!r}")


def _log1m_G_fn(code: CodeParams, path: str):
    if path == "exact":
        def fn(v):
            return _lnneglog_G_exact(v, code.N, code.log_M_minus_1)[1]
    else:
        def fn(v):
            return _lnneglog_G_approx(v, code.N, code.log2_M)[1]
    return fn


def _log_G_fn(code: CodeParams, path: str):
    """``ln G``; integrating it gives the success probability directly."""
    def fn(v):
        if path == "exact":
            lnl = _lnneglog_G_exact(v, code.N, code.log_M_minus_1)[0]
        else:
            lnl = _lnneglog_G_approx(v, code.N, code.log2_M)[0]
        with np.errstate(over="ignore"):
            return -np.exp(lnl)
    return fn


# ---------------------------------------------------------------------------
# median and fixed-point inversion
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class InversionInfo:
    """Outcome of :func:`fixed_point_inversion`."""

    rho: float
    path: str
    iterations: int
    residual: float
    banach_ok: bool


def banach_condition(code: CodeParams) -> bool:
    """Sufficient contraction condition ``N 2**(-NR) < 1``."""
    return math.log(code.N) - code.NR * LN2 < 0.0


def fixed_point_inversion(target_log: float, code: CodeParams, tol: float = 1e-12,
                          maxiter: int = 200) -> InversionInfo:
    """Solve ``approx CDF(rho) = exp(target_log)`` for ``rho``.

    Iterates the contraction map when the Banach condition holds and falls
    back to bracketed root finding otherwise.
    """
    if not (target_log < 0.0 and math.isfinite(target_log)):
        raise DomainError(f"target log must be finite and negative, got {target_log}")
    N = code.N
    ln_q = math.log(-target_log)
    c = math.log(N) + log_beta(0.5, 0.5 * (N + 1)) - code.NR * LN2

    def lnneglog(rho):
        return float(_lnneglog_G_approx(np.array([rho]), N, code.log2_M)[0][0])

    def residual(rho):
        return abs(math.exp(-math.exp(lnneglog(rho))) - math.exp(target_log))

    ok = banach_condition(code)
    if ok:
        rho = math.sqrt(-math.expm1(-2.0 * code.rate * LN2))
        for it in range(1, maxiter + 1):
            rho_new = math.sqrt(-math.expm1(2.0 / (N - 1) * (ln_q + c + math.log(rho))))
            if abs(rho_new - rho) < tol:
                return InversionInfo(rho_new, "fixed-point", it, residual(rho_new), True)
            rho = rho_new
        raise NumericalError("fixed-point iteration hit its cap", residual=residual(rho),
                             estimate=rho)
    g = lambda r: lnneglog(r) - ln_q  # decreasing in r
    lo, hi = 1e-300, 1.0 - 1e-17
    if g(lo) < 0 or g(hi) > 0:
        raise NumericalError("target outside the approximation's range")
    rho, res = optimize.brentq(g, lo, hi, xtol=tol, rtol=4 * np.finfo(float).eps,
                               maxiter=maxiter, full_output=True, disp=False)
    if not res.converged:
        raise NumericalError("bisection did not converge", estimate=rho)
    return InversionInfo(rho, "bisection", res.iterations, residual(rho), False)


def invert_approx_cdf(target_log, code: CodeParams) -> float:
    """``rho`` at which the large-``NR`` CDF approximation equals ``target_log``."""
    if isinstance(target_log, LogProb):
        target_log = target_log.log_value
    return fixed_point_inversion(float(target_log), code).rho


def median_rho(code: CodeParams, opts: EvalOptions | None = None) -> float:
    """Median of the largest wrong-codeword correlation."""
    opts = opts or EvalOptions()
    _check_code(code)
    if code.log2_M <= 0:
        raise DomainError("median needs M > 1")
    if code.NR > opts.exact_nr_limit:
        return invert_approx_cdf(-LN2, code)
    a = 0.5 * (code.N - 1)
    # Per-codeword CDF at the median: F = 2**(-1/(M-1)).
    lF = -LN2 * math.exp(-code.log_M_minus_1)
    if lF >= -LN2:
        # Upper half: tail mass u = 1 - F = I/2.
        log_y = LN2 + float(log1mexp(lF))
        _, xc = inv_reg_inc_beta_log(a, 0.5, min(log_y, 0.0))
        return math.sqrt(xc)
    _, xc = inv_reg_inc_beta_log(a, 0.5, lF + LN2)
    return -math.sqrt(xc)


def _rho_bound(code: CodeParams, chan, rho: float, method: str, extra: dict) -> PeResult:
    nu = code.N - 1
    delta = math.sqrt(code.N * chan.P)
    if rho == 0.0:
        t = 0.0
    else:
        t = rho * math.sqrt(nu) / math.sqrt((1.0 - rho) * (1.0 + rho))
    lo, _ = noncentral_t_logcdf(t, nu, delta)
    return PeResult(pe=math.exp(lo), method=method, log_pe=lo, is_lower_bound=True,
                    diagnostics=dict(extra, threshold_t=t))


def median_bound(code: CodeParams, chan, opts: EvalOptions | None = None) -> PeResult:
    """Lower bound from replacing the max-correlation CDF by a step at its median."""
    m = median_rho(code, opts)
    return _rho_bound(code, chan, m, "median-bound", {"median_rho": m})


def sphere_packing_radius(code: CodeParams) -> float:
    """Cosine radius of a spherical cap holding a ``2**(-NR)`` share of the sphere."""
    _check_code(code)
    if code.log2_M < 1.0:
        raise DomainError("sphere-packing bound needs M >= 2")
    _, xc = inv_reg_inc_beta_log(0.5 * (code.N - 1), 0.5, (1.0 - code.log2_M) * LN2)
    return math.sqrt(xc)


def sphere_packing_bound(code: CodeParams, chan, opts: EvalOptions | None = None) -> PeResult:
    """The 1959 sphere-packing lower bound."""
    rho = sphere_packing_radius(code)
    return _rho_bound(code, chan, rho, "spb", {"rho_sp": rho})


# ---------------------------------------------------------------------------
# exact error probability: double integral over (cos beta, chi)
# ---------------------------------------------------------------------------

def _chi_window(nu, tail=1e-200):
    dist = stats.chi(nu)
    return float(dist.ppf(tail)), float(dist.isf(tail))


def _v_of(s, chi):
    return s / np.hypot(s, chi)


def _graded_around(m, width, basic, lo, hi, ratio=2.0):
    pts = [m]
    w = width
    while w < basic * 8:
        pts += [m - w, m + w]
        w *= ratio
    pts = np.array(pts)
    return pts[(pts > lo) & (pts < hi)]


def _v_breaks(v_a, v_b, chi_ref, s_max, width, m, wall, max_panels=50000):
    """Breakpoints in v giving about ``width`` of s-spacing for every chi in the box.

    At fixed v the relevant chi is at most ``chi_ref`` and at most
    ``s_max sqrt(1 - v**2) / |v|``, which keeps panels geometric towards v = +-1.
    """
    out = [v_a]
    v = v_a
    while v < v_b:
        one_m = (1.0 - v) * (1.0 + v)
        chi_eff = min(chi_ref, s_max * math.sqrt(one_m) / max(abs(v), 1e-300))
        step = width * one_m ** 1.5 / max(chi_eff, 1e-300)
        step = min(max(step, 1e-15 * max(1.0, abs(v))), 0.05)
        v = v + step
        out.append(min(v, v_b))
        if len(out) > max_panels:
            raise NumericalError("too many cos-beta panels", estimate=len(out))
    br = np.array(out)
    if m is not None and v_a < m < v_b:
        basic = width * ((1.0 - m) * (1.0 + m)) ** 1.5 / chi_ref
        br = np.concatenate([br, _graded_around(m, min(wall, basic), basic, v_a, v_b)])
    br = np.unique(br)
    keep = np.concatenate([[True], np.diff(br) > 1e-15 * np.maximum(1.0, np.abs(br[1:]))])
    return br[keep]


def _log_integrand(v, chi, log1mG, mu, nu):
    """Log integrand on the (chi rows) x (v cols) grid."""
    one_m = (1.0 - v) * (1.0 + v)
    s = v[None, :] * chi[:, None] / np.sqrt(one_m)[None, :]
    with np.errstate(divide="ignore", invalid="ignore"):
        out = (log_chi_pdf(chi, nu)[:, None] + np.log(chi)[:, None]
               - 0.5 * (s - mu) ** 2 - LN_SQRT_2PI
               - 1.5 * np.log(one_m)[None, :] + log1mG[None, :])
    return np.where(np.isnan(out), -np.inf, out)


def _log_tensor_sum(v, wvk, wvg, chi, wck, wcg, log1mG, mu, nu, chunk=64):
    """``(ln sum_K, ln sum_G)`` of the tensor Kronrod and Gauss sums."""
    rows_k, rows_g = [], []
    with np.errstate(divide="ignore"):
        lwvk, lwvg = np.log(wvk), np.log(wvg)
    for i in range(0, len(chi), chunk):
        L = _log_integrand(v, chi[i:i + chunk], log1mG, mu, nu)
        peak = np.max(L, axis=1, keepdims=True)
        peak = np.where(np.isfinite(peak), peak, 0.0)
        E = np.exp(L - peak)
        with np.errstate(divide="ignore"):
            rows_k.append(np.log(E @ wvk) + peak[:, 0])
            rows_g.append(np.log(E @ wvg) + peak[:, 0])
    rk = np.concatenate(rows_k)
    rg = np.concatenate(rows_g)
    with np.errstate(divide="ignore"):
        lk = np.logaddexp.reduce(rk + np.log(wck))
        lg = np.logaddexp.reduce(rg + np.log(np.where(wcg > 0, wcg, 0.0)))
    return float(lk), float(lg)


def _pe_double_integral(code: CodeParams, P: float, log1mG_fn, m, opts: EvalOptions,
                        drop: float = 60.0):
    N = code.N
    nu = N - 1
    mu = math.sqrt(N * P)
    # Pass 1: coarse scan of a generous box to locate the mass.  Very small
    # error probabilities put the mass far out in s or chi, so the box
    # grows wherever the retained region touches its edge.
    chi_lo, chi_hi = _chi_window(nu)
    s_lo, s_hi = mu - 30.0, mu + 30.0
    wall = (1.0 - m * m) / (nu * abs(m)) if m is not None and m != 0 else 0.1
    for _ in range(12):
        chi_c = np.linspace(chi_lo, chi_hi, 81)
        s_ends = np.array([s_lo, s_hi])
        vv = _v_of(s_ends[None, :], np.maximum(chi_c, 1e-300)[:, None])
        v_lo = max(float(vv.min()), -1.0 + 1e-16)
        v_hi = min(float(vv.max()), 1.0 - 1e-16)
        v_c = np.linspace(v_lo, v_hi, 801)
        if m is not None:
            v_c = np.unique(np.concatenate([v_c, _graded_around(m, wall / 4, v_hi - v_lo,
                                                                v_lo, v_hi)]))
        L = _log_integrand(v_c, chi_c, log1mG_fn(v_c), mu, nu)
        Lmax = float(np.max(L))
        if not np.isfinite(Lmax):
            return -math.inf, 0.0, {}
        rows, cols = np.nonzero(L > Lmax - drop)
        span = chi_hi - chi_lo
        grow = False
        if cols.min() == 0 and v_lo > -1.0 + 1e-16:
            s_lo, grow = s_lo - (s_hi - s_lo) / 2, True
        if cols.max() == len(v_c) - 1 and v_hi < 1.0 - 1e-16:
            s_hi, grow = s_hi + (s_hi - s_lo) / 2, True
        if rows.min() == 0 and chi_lo > 0.0:
            chi_lo, grow = max(chi_lo - span / 2, 0.0), True
        if rows.max() == len(chi_c) - 1:
            chi_hi, grow = chi_hi + span / 2, True
        if not grow:
            break
    ia, ib = max(rows.min() - 1, 0), min(rows.max() + 1, len(chi_c) - 1)
    ja, jb = max(cols.min() - 1, 0), min(cols.max() + 1, len(v_c) - 1)
    chi_a, chi_b = float(chi_c[ia]), float(chi_c[ib])
    v_a, v_b = float(v_c[ja]), float(v_c[jb])

    # Pass 2: Kronrod panels on the box, graded at the error wall.
    width = opts.s_panel_width
    n_chi = max(4, int(math.ceil((chi_b - chi_a) / width)))
    chi_br = np.linspace(chi_a, chi_b, n_chi + 1)
    chi, wck, wcg = panel_nodes(chi_br)
    v_br = _v_breaks(v_a, v_b, max(chi_b, 1e-3), abs(mu) + 12.0, width, m, wall / 4)
    v, wvk, wvg = panel_nodes(v_br)
    lk, lg = _log_tensor_sum(v, wvk, wvg, chi, wck, wcg, log1mG_fn(v), mu, nu)
    rel = abs(math.expm1(lg - lk)) if np.isfinite(lk) else 0.0
    diag = {"chi_box": (chi_a, chi_b), "v_box": (v_a, v_b),
            "chi_panels": n_chi, "v_panels": len(v_br) - 1}
    return lk, rel, diag


def pe_exact(code: CodeParams, chan, opts: EvalOptions | None = None) -> PeResult:
    """Ensemble-average block error probability under ML decoding.

    ``opts.method`` picks the CDF of the largest correlation: ``exact``,
    ``approx`` (large ``NR``) or ``auto``.
    """
    opts = opts or EvalOptions()
    _check_code(code)
    if code.log2_M <= 0.0:
        return PeResult(pe=0.0, method="exact-double-integral", log_pe=-math.inf)
    path = _resolve_method(code, opts)
    if path == "exact":
        m = median_rho(code, EvalOptions(exact_nr_limit=math.inf))
    else:
        m = invert_approx_cdf(-LN2, code)
    lk, rel, diag = _pe_double_integral(code, chan.P, _log1m_G_fn(code, path), m, opts)
    if lk > -LN2:
        # Near-certain error: resolve 1 - Pe from the success integral.
        lc, rel_c, diag = _pe_double_integral(code, chan.P, _log_G_fn(code, path), m, opts)
        lk = float(log1mexp(min(lc, 0.0)))
        rel = rel_c * math.exp(lc - lk)
        diag["from_complement"] = True
    lk = min(lk, 0.0)
    if rel > max(1e3 * opts.tol, 1e-6):
        raise NumericalError("double integral did not reach tolerance", residual=rel,
                             estimate=math.exp(lk))
    diag["median_rho"] = m
    return PeResult(pe=math.exp(lk), log_pe=lk,
                    method="exact-double-integral" if path == "exact" else "approx",
                    rel_err_est=rel, quad_order=15, diagnostics=diag)


def pe_via_noncentral_t(code: CodeParams, chan, opts: EvalOptions | None = None) -> PeResult:
    """Same quantity as :func:`pe_exact` as a single integral over the
    noncentral t statistic ``t = s sqrt(N-1) / chi``."""
    opts = opts or EvalOptions()
    _check_code(code)
    if code.log2_M <= 0.0:
        return PeResult(pe=0.0, method="exact-noncentral-t", log_pe=-math.inf)
    path = _resolve_method(code, opts)
    log1mG = _log1m_G_fn(code, path)
    nu = code.N - 1
    delta = math.sqrt(code.N * chan.P)
    m = median_rho(code, EvalOptions(exact_nr_limit=math.inf)) if path == "exact" \
        else invert_approx_cdf(-LN2, code)
    v_delta = delta / math.sqrt(delta * delta + nu)

    def logf(v):
        # Integrate in v = t / sqrt(t**2 + nu) so the range is finite.
        v = np.asarray(v, dtype=float)
        one_m = (1.0 - v) * (1.0 + v)
        with np.errstate(divide="ignore", invalid="ignore"):
            t = v * math.sqrt(nu) / np.sqrt(one_m)
            out = log1mG(v) + noncentral_t_logpdf(t, nu, delta) \
                + 0.5 * math.log(nu) - 1.5 * np.log(one_m)
        return np.where(np.isnan(out), -np.inf, out)

    probe = np.linspace(-1.0 + 1e-9, 1.0 - 1e-9, 4001)
    shift = float(np.max(logf(probe)))
    if not np.isfinite(shift):
        shift = 0.0
    val, err = adaptive_integrate(lambda v: np.exp(logf(v) - shift), -1.0, 1.0,
                                  tol=min(opts.tol, 1e-9), points=sorted({m, v_delta}),
                                  min_split=64)
    lp = min(math.log(val) + shift, 0.0) if val > 0 else -math.inf
    return PeResult(pe=math.exp(lp), log_pe=lp, method="exact-noncentral-t",
                    rel_err_est=err / val if val > 0 else 0.0, quad_order=15,
                    diagnostics={"median_rho": m})
