# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled kernels: incomplete-beta continued fraction and the exhaustive
binary-channel tie enumeration."""

import numpy as np
cimport numpy as cnp
from libc.math cimport log, log1p, exp, expm1, fabs, lgamma, NAN, INFINITY

cnp.import_array()

cdef extern from *:
    """
    static inline int fble_popcount(unsigned int x) { return __builtin_popcount(x); }
    """
    int fble_popcount(unsigned int x) nogil

cdef double FPMIN = 1e-300
cdef double EPS = 1e-16
cdef int MAXIT = 20000
cdef double LN_SQRT_2PI = 0.9189385332046728
cdef double LN2 = 0.6931471805599453


cdef double _lgamma_corr(double x) nogil:
    cdef double x2 = 1.0 / (x * x)
    cdef double acc = -3617.0 / 122400.0
    acc = acc * x2 + 1.0 / 156.0
    acc = acc * x2 - 691.0 / 360360.0
    acc = acc * x2 + 1.0 / 1188.0
    acc = acc * x2 - 1.0 / 1680.0
    acc = acc * x2 + 1.0 / 1260.0
    acc = acc * x2 - 1.0 / 360.0
    acc = acc * x2 + 1.0 / 12.0
    return acc / x


cdef double _log_beta(double a, double b) nogil:
    cdef double p = a if a < b else b
    cdef double q = b if a < b else a
    cdef double corr
    if p >= 10.0:
        corr = _lgamma_corr(p) + _lgamma_corr(q) - _lgamma_corr(p + q)
        return (-0.5 * log(q) + LN_SQRT_2PI + corr
                + (p - 0.5) * log(p / (p + q)) + q * log1p(-p / (p + q)))
    if q >= 10.0:
        corr = _lgamma_corr(q) - _lgamma_corr(p + q)
        return lgamma(p) + corr + p - p * log(p + q) + (q - 0.5) * log1p(-p / (p + q))
    return lgamma(p) + lgamma(q) - lgamma(p + q)


cdef inline double _log1mexp(double l) nogil:
    if l > -LN2:
        return log(-expm1(l))
    return log1p(-exp(l))


cdef double _betacf(double a, double b, double x) nogil:
    cdef double qab = a + b, qap = a + 1.0, qam = a - 1.0
    cdef double c = 1.0, d, h, aa, delta
    cdef int m, m2
    d = 1.0 - qab * x / qap
    if fabs(d) < FPMIN:
        d = FPMIN
    d = 1.0 / d
    h = d
    for m in range(1, MAXIT + 1):
        m2 = 2 * m
        aa = m * (b - m) * x / ((qam + m2) * (a + m2))
        d = 1.0 + aa * d
        if fabs(d) < FPMIN:
            d = FPMIN
        c = 1.0 + aa / c
        if fabs(c) < FPMIN:
            c = FPMIN
        d = 1.0 / d
        h *= d * c
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2))
        d = 1.0 + aa * d
        if fabs(d) < FPMIN:
            d = FPMIN
        c = 1.0 + aa / c
        if fabs(c) < FPMIN:
            c = FPMIN
        d = 1.0 / d
        delta = d * c
        h *= delta
        if fabs(delta - 1.0) < EPS:
            return h
    return NAN


cdef double _log_lower_direct(double a, double b, double x, double xc, double lbeta) nogil:
    return a * log(x) + b * log(xc) - lbeta - log(a) + log(_betacf(a, b, x))


def log_betainc(double a, double b, x, xc):
    cdef cnp.ndarray[cnp.float64_t, ndim=1] xs = np.ascontiguousarray(x, dtype=np.float64).ravel()
    cdef cnp.ndarray[cnp.float64_t, ndim=1] xcs = np.ascontiguousarray(xc, dtype=np.float64).ravel()
    cdef Py_ssize_t n = xs.shape[0], i
    cdef cnp.ndarray[cnp.float64_t, ndim=1] lo = np.empty(n)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] up = np.empty(n)
    cdef double lab = _log_beta(a, b)
    cdef double switch = (a + 1.0) / (a + b + 2.0)
    cdef double l, xi, xci
    with nogil:
        for i in range(n):
            xi = xs[i]
            xci = xcs[i]
            if xi <= 0.0:
                lo[i] = -INFINITY
                up[i] = 0.0
            elif xci <= 0.0:
                lo[i] = 0.0
                up[i] = -INFINITY
            elif xi < switch:
                l = _log_lower_direct(a, b, xi, xci, lab)
                if l > 0.0:
                    l = 0.0
                lo[i] = l
                up[i] = _log1mexp(l)
            else:
                l = _log_lower_direct(b, a, xci, xi, lab)
                if l > 0.0:
                    l = 0.0
                up[i] = l
                lo[i] = _log1mexp(l)
    shape = np.shape(x)
    return lo.reshape(shape), up.reshape(shape)


def tie_profile(words, int N, int channel, int policy):
    cdef cnp.ndarray[cnp.uint32_t, ndim=2] w = np.ascontiguousarray(words, dtype=np.uint32)
    cdef Py_ssize_t n_cb = w.shape[0], M = w.shape[1]
    cdef cnp.ndarray[cnp.float64_t, ndim=2] out = np.zeros((n_cb, N + 1))
    cdef unsigned int n_pat = 1u << N
    cdef unsigned int full = n_pat - 1u
    cdef unsigned int e, rel, unerased
    cdef unsigned int rels[4096]
    cdef Py_ssize_t k, i
    cdef int pe, d, ties, strict
    cdef double err
    if M < 2:
        return out
    if M - 1 > 4096:
        raise ValueError("at most 4097 codewords supported")
    with nogil:
        for k in range(n_cb):
            for i in range(1, M):
                rels[i - 1] = w[k, i] ^ w[k, 0]
            for e in range(n_pat):
                pe = fble_popcount(e)
                ties = 0
                strict = 0
                if channel == 0:
                    for i in range(M - 1):
                        d = fble_popcount(rels[i] ^ e)
                        if d < pe:
                            strict = 1
                            break
                        elif d == pe:
                            ties += 1
                else:
                    unerased = full ^ e
                    for i in range(M - 1):
                        if (rels[i] & unerased) == 0:
                            ties += 1
                if strict:
                    err = 1.0
                elif ties == 0:
                    err = 0.0
                elif policy == 0:
                    err = ties / (ties + 1.0)
                elif policy == 1:
                    err = 1.0
                else:
                    err = 0.0
                out[k, pe] += err
    return out
