"""Pure numpy implementations of the compiled kernels.

Same signatures and semantics as ``_ckernels``; used when the extension
is not built or when ``FBLE_PURE_PYTHON=1``.
"""

import math

import numpy as np

FPMIN = 1e-300
EPS = 1e-16
MAXIT = 20000

_STIRLING = (
    1.0 / 12.0,
    -1.0 / 360.0,
    1.0 / 1260.0,
    -1.0 / 1680.0,
    1.0 / 1188.0,
    -691.0 / 360360.0,
    1.0 / 156.0,
    -3617.0 / 122400.0,
)
_LN_SQRT_2PI = 0.5 * math.log(2.0 * math.pi)


def lgamma_correction(x):
    """``lgamma(x) - [(x - 1/2) ln x - x + ln sqrt(2 pi)]`` for ``x >= 10``."""
    x2 = 1.0 / (x * x)
    acc = 0.0
    for c in reversed(_STIRLING):
        acc = acc * x2 + c
    return acc / x


def log_beta(a, b):
    """``ln B(a, b)`` without the cancellation of a plain lgamma sum."""
    p, q = min(a, b), max(a, b)
    if p >= 10.0:
        corr = lgamma_correction(p) + lgamma_correction(q) - lgamma_correction(p + q)
        return (
            -0.5 * math.log(q)
            + _LN_SQRT_2PI
            + corr
            + (p - 0.5) * math.log(p / (p + q))
            + q * math.log1p(-p / (p + q))
        )
    if q >= 10.0:
        corr = lgamma_correction(q) - lgamma_correction(p + q)
        return (
            math.lgamma(p)
            + corr
            + p
            - p * math.log(p + q)
            + (q - 0.5) * math.log1p(-p / (p + q))
        )
    return math.lgamma(p) + math.lgamma(q) - math.lgamma(p + q)


def _log1mexp(l):
    out = np.empty_like(l)
    near = l > -0.6931471805599453
    out[near] = np.log(-np.expm1(l[near]))
    out[~near] = np.log1p(-np.exp(l[~near]))
    return out


def _betacf(a, b, x):
    """Modified Lentz evaluation of the incomplete-beta continued fraction."""
    qab = a + b
    qap = a + 1.0
    qam = a - 1.0
    c = np.ones_like(x)
    d = 1.0 - qab * x / qap
    d = np.where(np.abs(d) < FPMIN, FPMIN, d)
    d = 1.0 / d
    h = d.copy()
    active = np.ones(x.shape, dtype=bool)
    for m in range(1, MAXIT + 1):
        if not active.any():
            break
        xa = x[active]
        da = d[active]
        ca = c[active]
        ha = h[active]
        m2 = 2 * m
        aa = m * (b - m) * xa / ((qam + m2) * (a + m2))
        da = 1.0 + aa * da
        da = np.where(np.abs(da) < FPMIN, FPMIN, da)
        ca = 1.0 + aa / ca
        ca = np.where(np.abs(ca) < FPMIN, FPMIN, ca)
        da = 1.0 / da
        ha = ha * da * ca
        aa = -(a + m) * (qab + m) * xa / ((a + m2) * (qap + m2))
        da = 1.0 + aa * da
        da = np.where(np.abs(da) < FPMIN, FPMIN, da)
        ca = 1.0 + aa / ca
        ca = np.where(np.abs(ca) < FPMIN, FPMIN, ca)
        da = 1.0 / da
        delta = da * ca
        ha = ha * delta
        d[active] = da
        c[active] = ca
        h[active] = ha
        done = np.abs(delta - 1.0) < EPS
        idx = np.flatnonzero(active)
        active[idx[done]] = False
    h[active] = np.nan
    return h


def _log_lower_direct(a, b, x, xc):
    """``ln I_x(a, b)`` by the continued fraction; valid below the switch point."""
    lbeta = log_beta(a, b)
    with np.errstate(divide="ignore"):
        pref = a * np.log(x) + b * np.log(xc) - lbeta - math.log(a)
    cf = _betacf(a, b, x)
    return pref + np.log(cf)


def log_betainc(a, b, x, xc):
    """Log of the regularized incomplete beta and of its complement.

    ``x`` and ``xc = 1 - x`` are both supplied so that callers holding an
    exact complement (e.g. ``v**2`` for ``1 - v**2``) keep full accuracy.
    Returns ``(ln I_x(a,b), ln(1 - I_x(a,b)))``.
    """
    x = np.ascontiguousarray(x, dtype=float)
    xc = np.ascontiguousarray(xc, dtype=float)
    lo = np.full(x.shape, np.nan)
    up = np.full(x.shape, np.nan)
    zero = x <= 0.0
    one = xc <= 0.0
    lo[zero], up[zero] = -np.inf, 0.0
    lo[one], up[one] = 0.0, -np.inf
    inner = ~(zero | one)
    swap = inner & (x >= (a + 1.0) / (a + b + 2.0))
    direct = inner & ~swap
    if direct.any():
        l = _log_lower_direct(a, b, x[direct], xc[direct])
        lo[direct] = l
        up[direct] = _log1mexp(np.minimum(l, 0.0))
    if swap.any():
        u = _log_lower_direct(b, a, xc[swap], x[swap])
        up[swap] = u
        lo[swap] = _log1mexp(np.minimum(u, 0.0))
    return lo, up


def _popcount_table(nbits):
    table = np.zeros(1 << nbits, dtype=np.int8)
    for k in range(nbits):
        table[1 << k:1 << (k + 1)] = table[: 1 << k] + 1
    return table


def tie_profile(words, N, channel, policy):
    """Exact conditional error mass per noise class for each codebook.

    ``words`` has shape ``(n_codebooks, M)`` with the transmitted word in
    column 0.  For the BSC the class is the number of flipped positions;
    for the BEC it is the number of erasures.  Entry ``[k, w]`` is the
    sum over all noise patterns of class ``w`` of the conditional error
    probability.  ``policy``: 0 uniform guessing, 1 ties are errors,
    2 ties are correct.
    """
    words = np.asarray(words, dtype=np.int64)
    n_cb, M = words.shape
    n_pat = 1 << N
    full = n_pat - 1
    pc = _popcount_table(N).astype(np.int64)
    patterns = np.arange(n_pat, dtype=np.int64)
    pat_weight = pc[patterns]
    out = np.zeros((n_cb, N + 1))
    if M < 2:
        return out
    batch = max(1, (1 << 22) // (n_pat * (M - 1)))
    for start in range(0, n_cb, batch):
        w = words[start:start + batch]
        rel = w[:, 1:] ^ w[:, :1]
        if channel == 0:
            dist = pc[rel[:, :, None] ^ patterns[None, None, :]]
            strict = (dist < pat_weight[None, None, :]).any(axis=1)
            ties = (dist == pat_weight[None, None, :]).sum(axis=1)
        else:
            unerased = full ^ patterns
            strict = np.zeros((w.shape[0], n_pat), dtype=bool)
            ties = ((rel[:, :, None] & unerased[None, None, :]) == 0).sum(axis=1)
        if policy == 0:
            err = ties / (ties + 1.0)
        elif policy == 1:
            err = (ties > 0).astype(float)
        else:
            err = np.zeros(ties.shape)
        err = np.where(strict, 1.0, err)
        for k in range(err.shape[0]):
            out[start + k] = np.bincount(pat_weight, weights=err[k], minlength=N + 1)
    return out
