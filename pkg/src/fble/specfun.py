"""Scalar special functions and stabilized kernels.

Everything that feeds a CDF raised to an exponentially large power is
available in log form; the scalar wrappers at the top of each section are
the public surface, the ``log_*`` array helpers are what the ensemble
modules call.
"""

from __future__ import annotations

import math

import numpy as np
from scipy import optimize
from scipy.special import gammainc, gammaincc, gammaln, log_ndtr, logsumexp, ndtr

from . import _kernels
from ._kernels._pykernels import lgamma_correction
from ._types import DomainError, LogProb, NumericalError
from .quadrature import log_integrate_concave, log_panel_sum, panel_nodes

LN2 = math.log(2.0)
LN_SQRT_2PI = 0.5 * math.log(2.0 * math.pi)


# ---------------------------------------------------------------------------
# elementary log-domain helpers
# ---------------------------------------------------------------------------

def log1mexp(l):
    """``ln(1 - exp(l))`` for ``l <= 0``, elementwise."""
    l = np.asarray(l, dtype=float)
    with np.errstate(divide="ignore"):
        return np.where(l > -LN2, np.log(-np.expm1(l)), np.log1p(-np.exp(l)))


def log1m_exp_neg_exp(lnl):
    """``ln(1 - exp(-exp(lnl)))``: log-complement of a probability given by
    the log of its negative log."""
    lnl = np.asarray(lnl, dtype=float)
    eps = np.exp(np.minimum(lnl, 700.0))
    with np.errstate(divide="ignore", invalid="ignore"):
        small = lnl - 0.5 * eps
        big = log1mexp(-eps)
    return np.where(lnl < -12.0, small, big)


def log_neg_log1m(log_x):
    """``ln(-ln(1 - x))`` from ``ln x``, via the series ``sum x**i / i``.

    For ``x <= 1/2`` the series is summed until the next term drops below
    1e-17 relative (at most 60 terms); above that ``log1mexp`` is used.
    """
    log_x = np.asarray(log_x, dtype=float)
    x = np.exp(np.minimum(log_x, 0.0))
    out = np.empty(np.shape(x))
    small = x <= 0.5
    if np.any(small):
        xs = x[small]
        acc = np.ones_like(xs)
        term = np.ones_like(xs)
        for i in range(2, 62):
            term = term * xs
            inc = term / i
            acc = acc + inc
            if np.all(inc <= 1e-17 * acc):
                break
        out[small] = log_x[small] + np.log(acc)
    if np.any(~small):
        with np.errstate(divide="ignore"):
            out[~small] = np.log(-log1mexp(np.minimum(log_x[~small], 0.0)))
    return out


# ---------------------------------------------------------------------------
# beta function family
# ---------------------------------------------------------------------------

def log_beta(a: float, b: float) -> float:
    """``ln B(a, b)`` accurate to a few ulp even for large arguments."""
    if not (a > 0 and b > 0):
        raise DomainError(f"beta function needs positive arguments, got ({a}, {b})")
    return _kernels.log_beta(float(a), float(b))


def log_reg_inc_beta(a, b, x, xc=None):
    """``(ln I_x(a,b), ln(1 - I_x(a,b)))`` for an array ``x``.

    Pass ``xc = 1 - x`` when it is known more accurately than ``1 - x``.
    """
    x = np.asarray(x, dtype=float)
    if xc is None:
        xc = 1.0 - x
    return _kernels.log_betainc(float(a), float(b), x, np.asarray(xc, dtype=float))


def reg_inc_beta(a: float, b: float, x: float) -> float:
    """Lower regularized incomplete beta function ``I_x(a, b)``."""
    if not (a > 0 and b > 0):
        raise DomainError(f"shape parameters must be positive, got ({a}, {b})")
    if not 0.0 <= x <= 1.0:
        raise DomainError(f"x must lie in [0, 1], got {x}")
    lo, up = log_reg_inc_beta(a, b, np.array([x]))
    if lo[0] < -LN2:
        return float(np.exp(lo[0]))
    return float(-np.expm1(up[0]))


def _inv_lower_log(a, b, log_y, tol=1e-15, maxiter=200):
    """Solve ``ln I_x(a,b) = log_y`` for ``x``; Newton in ``ln x`` with a bracket."""
    if log_y == -math.inf:
        return 0.0
    if log_y >= 0.0:
        return 1.0
    lbeta = log_beta(a, b)

    def g(t):
        x = math.exp(t)
        lo, _ = log_reg_inc_beta(a, b, np.array([x]), np.array([-math.expm1(t)]))
        return float(lo[0]) - log_y

    # Small-x asymptotic I ~ x**a / (a B(a,b)).
    t = min((log_y + math.log(a) + lbeta) / a, -1e-12)
    t_lo, t_hi = -math.inf, 0.0
    gt = g(t)
    for it in range(maxiter):
        if gt > 0:
            t_hi = t
        else:
            t_lo = t
        if abs(gt) < 1e-14 and it > 0:
            return math.exp(t)
        x = math.exp(t)
        xc = -math.expm1(t)
        lo, _ = log_reg_inc_beta(a, b, np.array([x]), np.array([xc]))
        with np.errstate(divide="ignore"):
            log_pdf = (a - 1.0) * t + (b - 1.0) * math.log(xc) - lbeta if xc > 0 else math.inf
        slope = math.exp(t + log_pdf - float(lo[0])) if math.isfinite(log_pdf) else math.inf
        step = gt / slope if slope > 0 else math.inf
        t_new = t - step
        if not (t_lo < t_new < t_hi) or not math.isfinite(t_new):
            if math.isinf(t_lo):
                t_new = t - max(1.0, abs(t))
            else:
                t_new = 0.5 * (t_lo + t_hi)
        if abs(t_new - t) <= tol * max(1.0, abs(t)):
            return math.exp(t_new)
        t = t_new
        gt = g(t)
    raise NumericalError("inverse incomplete beta did not converge", residual=gt,
                         estimate=math.exp(t))


def inv_reg_inc_beta_log(a: float, b: float, log_y: float) -> tuple[float, float]:
    """Inverse of ``I_x(a,b)`` for a target given by its log.

    Returns ``(x, 1 - x)`` with the smaller of the two computed directly,
    so deep-tail solutions keep full relative accuracy.
    """
    if not (a > 0 and b > 0):
        raise DomainError(f"shape parameters must be positive, got ({a}, {b})")
    if log_y > 0:
        raise DomainError(f"target log {log_y} > 0")
    if log_y > -LN2:
        # Upper half: solve the mirrored problem on the complement.
        log_yc = float(log1mexp(log_y))
        xc = _inv_lower_log(b, a, log_yc)
        return 1.0 - xc, xc
    x = _inv_lower_log(a, b, log_y)
    return x, 1.0 - x


def inv_reg_inc_beta(a: float, b: float, y: float) -> float:
    """``x`` with ``I_x(a, b) = y``."""
    if not 0.0 <= y <= 1.0:
        raise DomainError(f"y must lie in [0, 1], got {y}")
    if y == 0.0:
        return 0.0
    if y == 1.0:
        return 1.0
    if y > 0.5:
        xc = _inv_lower_log(b, a, math.log1p(-y))
        return 1.0 - xc
    return _inv_lower_log(a, b, math.log(y))


def inc_beta_tail_upper_bound(a: float, x: float) -> float:
    """Upper bound ``x**a / (a sqrt(1-x) B(1/2, a))`` on ``I_x(a, 1/2)``."""
    if not a > 0:
        raise DomainError(f"a must be positive, got {a}")
    if not 0.0 <= x < 1.0:
        raise DomainError(f"x must lie in [0, 1), got {x}")
    if x == 0.0:
        return 0.0
    return math.exp(a * math.log(x) - math.log(a) - 0.5 * math.log1p(-x) - log_beta(0.5, a))


# ---------------------------------------------------------------------------
# powers of probabilities close to one
# ---------------------------------------------------------------------------

def pow_one_minus(x: float, a: float) -> LogProb:
    """``(1 - x)**a`` as a ``LogProb`` via the exponent series ``-a sum x**i / i``."""
    if not 0.0 <= x <= 1.0:
        raise DomainError(f"x must lie in [0, 1], got {x}")
    if a < 0:
        raise DomainError(f"a must be nonnegative, got {a}")
    if a == 0.0 or x == 0.0:
        return LogProb(0.0, -math.inf)
    if x == 1.0:
        return LogProb(-math.inf, math.inf)
    return pow_one_minus_log(math.log(x), math.log(a))


def pow_one_minus_log(log_x: float, log_a: float) -> LogProb:
    """``(1 - x)**a`` from ``ln x`` and ``ln a``; neither needs to be representable."""
    lnl = log_a + float(log_neg_log1m(np.array([log_x]))[0])
    return LogProb.from_log_neg_log(lnl)


# ---------------------------------------------------------------------------
# binomial
# ---------------------------------------------------------------------------

def log_binom(n, k):
    """``ln C(n, k)`` for integer arrays via the beta function."""
    n = np.asarray(n, dtype=float)
    k = np.asarray(k, dtype=float)
    out = np.zeros(np.broadcast(n, k).shape)
    nb, kb = np.broadcast_arrays(n, k)
    inner = (kb > 0) & (kb < nb)
    for idx in zip(*np.nonzero(inner)) if out.ndim else ([()] if inner else []):
        out[idx] = -math.log(nb[idx] + 1.0) - _kernels.log_beta(kb[idx] + 1.0, nb[idx] - kb[idx] + 1.0)
    out = np.where((kb < 0) | (kb > nb), -np.inf, out)
    return out


def log_binom_row(n: int):
    """``ln C(n, k)`` for ``k = 0..n``, exact to a few ulp."""
    k = np.arange(n + 1, dtype=float)
    out = np.zeros(n + 1)
    if n >= 2:
        kk = k[1:-1]
        out[1:-1] = [-math.log(n + 1.0) - _kernels.log_beta(ki + 1.0, n - ki + 1.0) for ki in kk]
    return out


def log_binomial_pmf(k: int, n: int, p: float) -> LogProb:
    """``ln[C(n,k) p**k (1-p)**(n-k)]``."""
    if not 0 <= k <= n:
        raise DomainError(f"need 0 <= k <= n, got k={k}, n={n}")
    if not 0.0 <= p <= 1.0:
        raise DomainError(f"p must lie in [0, 1], got {p}")
    if p == 0.0:
        return LogProb.from_log(0.0 if k == 0 else -math.inf)
    if p == 1.0:
        return LogProb.from_log(0.0 if k == n else -math.inf)
    lc = 0.0 if k in (0, n) else -math.log(n + 1.0) - _kernels.log_beta(k + 1.0, n - k + 1.0)
    return LogProb.from_log(min(lc + k * math.log(p) + (n - k) * math.log1p(-p), 0.0))


def log_binomial_weights(n: int, p: float):
    """``ln Pr[K = k]`` for ``K ~ Binomial(n, p)``, ``k = 0..n``."""
    k = np.arange(n + 1, dtype=float)
    if p == 0.0:
        return np.where(k == 0, 0.0, -np.inf)
    if p == 1.0:
        return np.where(k == n, 0.0, -np.inf)
    return log_binom_row(n) + k * math.log(p) + (n - k) * math.log1p(-p)


# ---------------------------------------------------------------------------
# chi density and the noncentral t distribution
# ---------------------------------------------------------------------------

def log_chi_pdf(x, nu):
    """Log density of the chi distribution with ``nu`` degrees of freedom.

    For large ``nu`` the density is written around ``s = sqrt(nu - 1)``
    with a Stirling-remainder constant, avoiding the cancellation between
    ``(nu - 1) ln x``, ``x**2 / 2`` and ``lgamma(nu / 2)``.
    """
    x = np.asarray(x, dtype=float)
    c = (0.5 * nu - 1.0) * LN2 + math.lgamma(0.5 * nu)
    with np.errstate(divide="ignore", invalid="ignore"):
        if nu >= 20.0:
            h = 0.5 * nu
            s = math.sqrt(nu - 1.0)
            const = (0.5 * LN2 + (h - 0.5) * math.log1p(-0.5 / h) + 0.5 - LN_SQRT_2PI
                     - lgamma_correction(h))
            d = x - s
            out = (nu - 1.0) * np.log1p(d / s) - 0.5 * d * (x + s) + const
        else:
            out = (nu - 1.0) * np.log(x) - 0.5 * x * x - c
    return np.where(x > 0, out, -np.inf if nu > 1 else np.where(x == 0, -c, -np.inf))


def _mills(y):
    """``phi(y) / Phi(y)``, stable in both tails."""
    return np.exp(-0.5 * y * y - LN_SQRT_2PI - log_ndtr(y))


def _log_gauss_chi_expect(slope, shift, nu):
    """``ln E[Phi(slope * chi - shift)]`` with ``chi ~ chi(nu)``."""
    def h(x):
        return log_ndtr(slope * x - shift) + log_chi_pdf(x, nu)

    def dh(x):
        x = float(x)
        return float(slope * _mills(slope * x - shift)) + (nu - 1.0) / x - x

    start = max(math.sqrt(max(nu - 1.0, 0.0)), 1e-3)
    return log_integrate_concave(h, dh, lo=0.0, hi=math.inf, scale=0.5, x_start=start)


def noncentral_t_logcdf(t: float, nu: float, delta: float) -> tuple[float, float]:
    """``(ln P_t, ln(1 - P_t))`` for the noncentral t distribution."""
    if not nu >= 1:
        raise DomainError(f"degrees of freedom must be >= 1, got {nu}")
    if t == 0.0:
        return float(log_ndtr(-delta)), float(log_ndtr(delta))
    a = t / math.sqrt(nu)
    lo, _ = _log_gauss_chi_expect(a, delta, nu)
    up, _ = _log_gauss_chi_expect(-a, -delta, nu)
    return min(lo, 0.0), min(up, 0.0)


def noncentral_t_cdf(t: float, nu: float, delta: float) -> float:
    """``Pr[(delta + Z) sqrt(nu) / chi_nu <= t]``."""
    lo, up = noncentral_t_logcdf(t, nu, delta)
    if lo < -LN2:
        return math.exp(lo)
    return -math.expm1(up)


def noncentral_t_logpdf(t, nu: float, delta: float, n_panels: int = 16):
    """Log density of the noncentral t distribution, vectorized over ``t``.

    Integrates ``phi(t x / sqrt(nu) - delta) x / sqrt(nu)`` against the chi
    density on a window placed around the integrand's mode, which has a
    closed form because the log-integrand is quadratic plus ``nu ln x``.
    """
    t = np.atleast_1d(np.asarray(t, dtype=float))
    a = t / math.sqrt(nu)
    curv = 1.0 + a * a
    x0 = (a * delta + np.sqrt((a * delta) ** 2 + 4.0 * curv * nu)) / (2.0 * curv)
    half = math.sqrt(2.0 * 80.0) / np.sqrt(curv)
    left = np.maximum(x0 - half, 0.0)
    right = x0 + half
    u = np.linspace(0.0, 1.0, n_panels + 1)
    breaks = left[:, None] + (right - left)[:, None] * u[None, :]
    xs, wks, wgs = [], [], []
    for row in breaks:
        x, wk, wg = panel_nodes(row)
        xs.append(x)
        wks.append(wk)
        wgs.append(wg)
    x = np.array(xs)
    wk = np.array(wks)
    wg = np.array(wgs)
    y = a[:, None] * x - delta
    logf = -0.5 * y * y - LN_SQRT_2PI + np.log(np.maximum(x, 1e-300)) - 0.5 * math.log(nu) \
        + log_chi_pdf(x, nu)
    lk, _ = log_panel_sum(logf, wk, wg, axis=1)
    return lk


# ---------------------------------------------------------------------------
# noncentral chi-square and the generalized Marcum Q function
# ---------------------------------------------------------------------------

def _log_gammainc_lower(a, x):
    """``ln P(a, x)`` (regularized lower incomplete gamma), elementwise.

    Uses scipy's ``gammainc`` where representable, the log series where
    the value underflows.
    """
    a, x = np.broadcast_arrays(np.asarray(a, dtype=float), np.asarray(x, dtype=float))
    with np.errstate(divide="ignore"):
        out = np.log(gammainc(a, x))
    deep = (out < -650.0) & (x > 0)
    if np.any(deep):
        ad, xd = a[deep], x[deep]
        acc = np.ones_like(xd)
        term = np.ones_like(xd)
        for k in range(1, 5000):
            term = term * xd / (ad + k)
            acc = acc + term
            if np.all(term < 1e-17 * acc):
                break
        out[deep] = ad * np.log(xd) - xd - gammaln(ad + 1.0) + np.log(acc)
    return out


def _log_gammainc_upper(a, x):
    """``ln Q(a, x)``; continued fraction where scipy's value underflows."""
    a, x = np.broadcast_arrays(np.asarray(a, dtype=float), np.asarray(x, dtype=float))
    with np.errstate(divide="ignore"):
        out = np.log(gammaincc(a, x))
    deep = (out < -650.0) & (x > a + 1.0)
    if np.any(deep):
        ad, xd = a[deep], x[deep]
        tiny = 1e-300
        b = xd + 1.0 - ad
        c = np.full_like(xd, 1.0 / tiny)
        d = 1.0 / b
        h = d.copy()
        for i in range(1, 10000):
            an = -i * (i - ad)
            b = b + 2.0
            d = an * d + b
            d = np.where(np.abs(d) < tiny, tiny, d)
            c = b + an / c
            c = np.where(np.abs(c) < tiny, tiny, c)
            d = 1.0 / d
            delta = d * c
            h = h * delta
            if np.all(np.abs(delta - 1.0) < 1e-16):
                break
        out[deep] = ad * np.log(xd) - xd - gammaln(ad) + np.log(h)
    return out


def _poisson_hi(mu):
    """Upper end of the Poisson(mu) index range holding all but ~1e-20 of the mass."""
    return int(math.ceil(mu + 11.0 * math.sqrt(mu + 1.0) + 25.0))


def _log_gamma_terms(a, xh):
    """``ln[xh**a exp(-xh) / Gamma(a + 1)]`` on the (x, j) grid."""
    with np.errstate(divide="ignore", invalid="ignore"):
        out = a[None, :] * np.log(xh)[:, None] - xh[:, None] - gammaln(a + 1.0)[None, :]
    return np.where(np.isnan(out), -np.inf, out)


def log_poisson_pmf(j, mu):
    j = np.asarray(j, dtype=float)
    if mu == 0:
        return np.where(j == 0, 0.0, -np.inf)
    return j * math.log(mu) - mu - gammaln(j + 1.0)


def _lse(a, axis=-1):
    """Plain log-sum-exp; ``-inf`` rows stay ``-inf``."""
    m = np.max(a, axis=axis, keepdims=True)
    m = np.where(np.isfinite(m), m, 0.0)
    with np.errstate(divide="ignore"):
        return np.log(np.sum(np.exp(a - m), axis=axis)) + np.squeeze(m, axis=axis)


def ncx2_logcdf(x, k: float, lam: float, upper: bool = True):
    """``(ln F, ln(1 - F))`` of the noncentral chi-square CDF at ``x``.

    Poisson(lam/2) mixture of central chi-square CDFs with ``k + 2j`` dof.
    With ``t_j = y**a_j e**-y / Gamma(a_j + 1)``, ``a_j = k/2 + j``,
    ``y = x/2``, the recurrence ``P(a_j) = P(a_{j+1}) + t_j`` turns the
    mixture into ``sum_j t_j F_pois(j) + P(a_J) F_pois(J)`` (and the
    analogous upward form for the upper tail), a sum of positive terms
    needing a single incomplete gamma value per ``x``.
    ``upper=False`` skips the upper tail.
    """
    x = np.atleast_1d(np.asarray(x, dtype=float))
    xh = 0.5 * np.maximum(x, 0.0)
    mu = 0.5 * lam
    j = np.arange(_poisson_hi(mu) + 1, dtype=float)
    a = 0.5 * k + j
    lw = log_poisson_pmf(j, mu)
    lF = np.logaddexp.accumulate(lw)
    lt = _log_gamma_terms(a, xh)
    top = _log_gammainc_lower(np.full(len(x), a[-1]), xh)
    terms = np.concatenate([lt[:, :-1] + lF[None, :-1], (top + lF[-1])[:, None]], axis=1)
    lo = _lse(terms, axis=1)
    lo = np.where(x <= 0, -np.inf, np.minimum(lo, 0.0))
    if not upper:
        return lo, np.full(len(x), np.nan)
    # Upper tail: terms with j ~ sqrt(lam x)/2 dominate far out in x.
    j_hi = max(len(j) - 1, _poisson_hi(math.sqrt(mu * float(np.max(xh, initial=0.0)))))
    ju = np.arange(j_hi + 1, dtype=float)
    au = 0.5 * k + ju
    lwu = log_poisson_pmf(ju, mu)
    # lS[i] = ln sum_{j > i} w_j within the range, plus the mass beyond it.
    with np.errstate(divide="ignore"):
        ltail = float(np.log(gammainc(ju[-1] + 1.0, mu))) if lam > 0 else -np.inf
    lS = np.logaddexp.accumulate(np.concatenate([[ltail], lwu[:0:-1]]))[::-1]
    lW = np.logaddexp(lS[0], lwu[0])
    ltu = _log_gamma_terms(au, xh)
    q0 = _log_gammainc_upper(np.full(len(x), au[0]), xh)
    terms = np.concatenate([(q0 + lW)[:, None], ltu + lS[None, :]], axis=1)
    up = _lse(terms, axis=1)
    up = np.where(x <= 0, 0.0, np.minimum(up, 0.0))
    # Take the larger tail from the complement of the smaller one.
    lo, up = np.where(up < -LN2, log1mexp(up), lo), np.where(lo < -LN2, log1mexp(lo), up)
    return lo, up


def ncx2_logpdf(x, k: float, lam: float):
    """Log density of the noncentral chi-square distribution."""
    x = np.atleast_1d(np.asarray(x, dtype=float))
    mu = 0.5 * lam
    hi = max(_poisson_hi(mu), _poisson_hi(math.sqrt(mu * 0.5 * float(np.max(x, initial=0.0)))))
    j = np.arange(hi + 1, dtype=float)
    lw = log_poisson_pmf(j, mu)
    d = k + 2.0 * j[None, :]
    with np.errstate(divide="ignore"):
        lx = np.log(x)[:, None]
    lchi = (0.5 * d - 1.0) * lx - 0.5 * x[:, None] - 0.5 * d * LN2 - gammaln(0.5 * d)
    out = _lse(lw[None, :] + lchi, axis=1)
    return np.where(x > 0, out, -np.inf)


def marcum_q(order: float, a: float, b: float) -> float:
    """Generalized Marcum Q function ``Q_order(a, b)``."""
    if not order >= 0.5:
        raise DomainError(f"order must be >= 1/2, got {order}")
    if a < 0 or b < 0:
        raise DomainError("a and b must be nonnegative")
    if b == 0:
        return 1.0
    lo, up = ncx2_logcdf(np.array([b * b]), 2.0 * order, a * a)
    if not (np.isfinite(lo[0]) or np.isfinite(up[0])):
        raise NumericalError("noncentral chi-square series failed")
    if up[0] < -LN2:
        return float(np.exp(up[0]))
    return float(-np.expm1(lo[0]))


def normal_cdf(x):
    return ndtr(x)
