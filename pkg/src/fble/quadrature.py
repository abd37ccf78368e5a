"""Gauss rules, an adaptive Gauss-Kronrod integrator and log-domain
composite rules for sharply concentrated integrands."""

from __future__ import annotations

import heapq
import math
from dataclasses import dataclass

import numpy as np
from scipy import linalg
from scipy.special import gammaln, logsumexp

from ._types import DomainError, NumericalError

# 15-point Kronrod extension of the 7-point Gauss rule on [-1, 1].
_XK = np.array([
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144845693013,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.000000000000000000000000000000000,
])
_WK = np.array([
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
])
_WG = np.array([
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
])

KRONROD_NODES = np.concatenate([-_XK[:-1], _XK[::-1]])
KRONROD_WEIGHTS = np.concatenate([_WK[:-1], _WK[::-1]])
# Gauss weights laid out on the Kronrod nodes (zero on Kronrod-only nodes).
GAUSS_WEIGHTS = np.zeros(15)
GAUSS_WEIGHTS[[1, 3, 5]] = _WG[:3]
GAUSS_WEIGHTS[7] = _WG[3]
GAUSS_WEIGHTS[[9, 11, 13]] = _WG[2::-1]


@dataclass(frozen=True)
class QuadratureRule:
    """Nodes and positive weights of a Gauss rule.

    ``log_mass`` is the log of the total weight, kept separately so that
    generalized-Laguerre rules with huge ``Gamma(alpha + 1)`` stay usable:
    ``weights`` are normalized to sum to one when ``normalized`` is set.
    """

    nodes: np.ndarray
    weights: np.ndarray
    kind: str
    alpha: float = 0.0
    log_mass: float = 0.0
    normalized: bool = False

    def __len__(self):
        return len(self.nodes)

    def integrate(self, f):
        """Apply the rule to ``f``; returns the integral against the weight function."""
        vals = f(self.nodes)
        total = np.dot(self.weights, vals)
        if self.normalized:
            total = total * math.exp(self.log_mass)
        return total


def _golub_welsch(diag, offdiag):
    """Nodes from the Jacobi matrix; unit-mass weights from the Christoffel
    function ``1 / sum_k p_k(x)**2`` of the orthonormal recurrence, which
    keeps full relative accuracy for the tiny outer weights that the
    eigenvector components lose."""
    x = np.sort(linalg.eigvalsh_tridiagonal(diag, offdiag))
    p_prev = np.zeros_like(x)
    p = np.ones_like(x)
    total = np.ones_like(x)
    log_scale = np.zeros_like(x)  # total and p are stored divided by exp(log_scale)
    for k in range(len(diag) - 1):
        b_prev = offdiag[k - 1] if k else 0.0
        p, p_prev = ((x - diag[k]) * p - b_prev * p_prev) / offdiag[k], p
        total += p * p
        big = total > 1e200
        if np.any(big):
            sc = np.where(big, 1e-100, 1.0)
            p, p_prev, total = p * sc, p_prev * sc, total * sc * sc
            log_scale += np.where(big, 200.0 * math.log(10.0), 0.0)
    log_w = -(np.log(total) + log_scale)
    w = np.exp(log_w - np.max(log_w))
    return x, w / w.sum()


def gauss_hermite(n: int) -> QuadratureRule:
    """Gauss-Hermite rule for the weight ``exp(-x**2)`` on the real line."""
    if not 1 <= n <= 1024:
        raise DomainError(f"order must lie in [1, 1024], got {n}")
    if n == 1:
        return QuadratureRule(np.zeros(1), np.array([math.sqrt(math.pi)]), "hermite")
    k = np.arange(1, n)
    try:
        x, w = _golub_welsch(np.zeros(n), np.sqrt(k / 2.0))
    except linalg.LinAlgError as exc:
        raise NumericalError(f"eigen-solver failed for Hermite order {n}") from exc
    # Symmetrize against eigen-solver noise.
    x = 0.5 * (x - x[::-1])
    w = 0.5 * (w + w[::-1]) * math.sqrt(math.pi)
    return QuadratureRule(x, w, "hermite", log_mass=0.5 * math.log(math.pi))


def gauss_laguerre(n: int, alpha: float = 0.0, normalized: bool = False) -> QuadratureRule:
    """Generalized Gauss-Laguerre rule for ``x**alpha * exp(-x)`` on (0, inf).

    With ``normalized=True`` the weights sum to one and the total mass
    ``Gamma(alpha + 1)`` is carried in ``log_mass``; needed once alpha is
    in the hundreds and the mass overflows (forced once it would).
    """
    if not 1 <= n <= 1024:
        raise DomainError(f"order must lie in [1, 1024], got {n}")
    if not alpha > -1.0:
        raise DomainError(f"alpha must exceed -1, got {alpha}")
    k = np.arange(n)
    diag = 2.0 * k + alpha + 1.0
    kk = np.arange(1, n)
    off = np.sqrt(kk * (kk + alpha))
    try:
        x, w = _golub_welsch(diag, off) if n > 1 else (diag.copy(), np.ones(1))
    except linalg.LinAlgError as exc:
        raise NumericalError(f"eigen-solver failed for Laguerre order {n}") from exc
    log_mass = float(gammaln(alpha + 1.0))
    w = w / w.sum()
    if log_mass > 700.0:
        normalized = True  # Gamma(alpha + 1) is not representable
    if not normalized:
        w = w * math.exp(log_mass)
    return QuadratureRule(x, w, "generalized-laguerre", alpha=alpha,
                          log_mass=log_mass, normalized=normalized)


def gauss_legendre(n: int, a: float = -1.0, b: float = 1.0) -> QuadratureRule:
    x, w = np.polynomial.legendre.leggauss(n)
    half = 0.5 * (b - a)
    return QuadratureRule(a + half * (x + 1.0), half * w, "interval")


def panel_nodes(breaks):
    """Kronrod nodes for consecutive panels ``[breaks[i], breaks[i+1]]``.

    Returns ``(x, wk, wg)``: nodes and the Kronrod and embedded Gauss
    weights, all flat arrays of length ``15 * (len(breaks) - 1)``.
    """
    breaks = np.asarray(breaks, dtype=float)
    lo, hi = breaks[:-1], breaks[1:]
    half = 0.5 * (hi - lo)
    mid = 0.5 * (hi + lo)
    x = (mid[:, None] + half[:, None] * KRONROD_NODES[None, :]).ravel()
    wk = (half[:, None] * KRONROD_WEIGHTS[None, :]).ravel()
    wg = (half[:, None] * GAUSS_WEIGHTS[None, :]).ravel()
    return x, wk, wg


def log_panel_sum(logf, wk, wg, axis=-1):
    """Log of the Kronrod sum and relative Kronrod-minus-Gauss error."""
    with np.errstate(divide="ignore"):
        lk = logsumexp(logf + np.log(wk), axis=axis)
        lg = logsumexp(logf + np.log(np.where(wg > 0, wg, 0.0)), axis=axis)
    rel = np.abs(np.expm1(np.where(np.isfinite(lk), lg - lk, 0.0)))
    return lk, rel


def graded_breaks(lo, hi, center, min_width, max_width, ratio=2.0):
    """Breakpoints on ``[lo, hi]`` refined geometrically towards ``center``."""
    if hi <= lo:
        raise DomainError("empty interval")
    pts = [lo, hi]
    if lo < center < hi:
        pts.append(center)
        for sign, end in ((-1.0, lo), (1.0, hi)):
            w = min_width
            x = center
            while True:
                x = x + sign * w
                if (x - end) * sign >= 0:
                    break
                pts.append(x)
                w = min(w * ratio, max_width)
    pts = np.unique(np.asarray(pts))
    # Fill remaining wide gaps uniformly.
    out = [pts[0]]
    for a, b in zip(pts[:-1], pts[1:]):
        k = int(math.ceil((b - a) / max_width))
        if k > 1:
            out.extend(np.linspace(a, b, k + 1)[1:-1])
        out.append(b)
    return np.asarray(out)


def log_integrate_concave(h, dh, lo=0.0, hi=math.inf, scale=1.0, drop=75.0,
                          n_panels=16, x_start=None):
    """``ln`` of the integral of ``exp(h)`` for a concave ``h`` on ``[lo, hi]``.

    The mode is located by bracketing the root of ``dh``; the window is
    grown from it until ``h`` has dropped by ``drop`` on both sides, then
    covered by Kronrod panels.  Returns ``(log_value, rel_err_est)``.
    """
    x0 = _concave_mode(dh, lo, hi, scale, x_start)
    h0 = float(h(np.array([x0]))[0])
    if not math.isfinite(h0):
        raise NumericalError("log-integrand not finite at its mode", estimate=x0)
    left = _window_edge(h, x0, h0, -1.0, lo, scale, drop)
    right = _window_edge(h, x0, h0, 1.0, hi, scale, drop)
    breaks = np.unique(np.concatenate([
        np.linspace(left, x0, n_panels // 2 + 1),
        np.linspace(x0, right, n_panels // 2 + 1),
    ]))
    if len(breaks) < 2:
        return h0, 0.0
    if left == lo and len(breaks) > 2:
        # Window reaches a finite endpoint: grade geometrically towards it
        # so algebraic endpoint behaviour (x**alpha) stays resolved.
        w = breaks[-1] - breaks[0]
        breaks = np.unique(np.concatenate([breaks, lo + w * 0.5 ** np.arange(1, 48)]))
    x, wk, wg = panel_nodes(breaks)
    with np.errstate(divide="ignore", invalid="ignore"):
        vals = h(x)
    vals = np.where(np.isnan(vals), -np.inf, vals)
    lk, rel = log_panel_sum(vals, wk, wg)
    return float(lk), float(rel)


def _concave_mode(dh, lo, hi, scale, x_start):
    a = lo
    if math.isfinite(lo):
        d_lo = dh(lo + 1e-300 if lo == 0 else lo)
        if d_lo <= 0:
            return lo
    b = x_start if x_start is not None else (lo + scale if math.isfinite(lo) else scale)
    if not math.isfinite(lo):
        a = b - scale
        step = scale
        while dh(a) <= 0:
            b = a
            a -= step
            step *= 2
            if step > 1e300:
                raise NumericalError("mode search diverged")
    step = scale
    while b < hi and dh(b) > 0:
        a = b
        b = b + step
        step *= 2
        if step > 1e300:
            raise NumericalError("mode search diverged")
    if b > hi:
        b = hi
        if dh(b) > 0:
            return hi
    for _ in range(200):
        m = 0.5 * (a + b)
        if m <= a or m >= b:
            break
        if dh(m) > 0:
            a = m
        else:
            b = m
    return 0.5 * (a + b)


def _window_edge(h, x0, h0, sign, bound, scale, drop):
    step = scale
    x = x0
    for _ in range(2000):
        cand = x0 + sign * step
        if (cand - bound) * sign >= 0:
            return bound
        hv = float(h(np.array([cand]))[0])
        if not hv > h0 - drop:
            return cand
        x = cand
        step *= 1.6
    raise NumericalError("integration window did not close", estimate=x)


def adaptive_integrate(f, a, b, tol=1e-10, tol_abs=1e-300, points=(), max_intervals=4000,
                       min_split=8):
    """Globally adaptive Gauss-Kronrod (7/15) integration of a vectorized ``f``.

    Infinite endpoints are mapped with ``x = t / (1 - t**2)``.  ``points``
    are interior breakpoints in the original variable, approached by
    geometrically shrinking panels; every initial piece is cut into
    ``min_split`` panels so narrow peaks are not missed.  Returns
    ``(value, err_est)``; raises ``NumericalError`` when the interval
    budget is exhausted.
    """
    if a == b:
        return 0.0, 0.0
    if a > b:
        v, e = adaptive_integrate(f, b, a, tol, tol_abs, points, max_intervals, min_split)
        return -v, e

    def to_x(t):
        return t / (1.0 - t * t)

    def to_t(x):
        if x == math.inf:
            return 1.0
        if x == -math.inf:
            return -1.0
        if x == 0:
            return 0.0
        return (math.sqrt(1.0 + 4.0 * x * x) - 1.0) / (2.0 * x)

    mapped = not (math.isfinite(a) and math.isfinite(b))
    if mapped:
        ta, tb = to_t(a), to_t(b)

        def g(t):
            x = to_x(t)
            jac = (1.0 + t * t) / (1.0 - t * t) ** 2
            return f(x) * jac

        pts = [to_t(p) for p in points if a < p < b]
    else:
        ta, tb = a, b
        g = f
        pts = [p for p in points if a < p < b]

    def panel(lo, hi):
        half = 0.5 * (hi - lo)
        mid = 0.5 * (hi + lo)
        x = mid + half * KRONROD_NODES
        with np.errstate(all="ignore"):
            y = np.asarray(g(x), dtype=float)
        y = np.where(np.isfinite(y), y, 0.0)
        k = half * np.dot(KRONROD_WEIGHTS, y)
        gs = half * np.dot(GAUSS_WEIGHTS, y)
        return k, abs(k - gs)

    coarse = [ta] + sorted(pts) + [tb]
    edges = [ta]
    for lo, hi in zip(coarse[:-1], coarse[1:]):
        edges.extend(np.linspace(lo, hi, min_split + 1)[1:].tolist())
    # Grade geometrically towards each breakpoint: features sitting on a
    # point may be far narrower than the initial panels.
    w0 = (tb - ta) / min_split
    for p in pts:
        w = w0 * 0.5 ** np.arange(1, 60)
        w = w[w > 8 * np.finfo(float).eps * max(1.0, abs(p))]
        edges.extend((p - w).tolist() + (p + w).tolist())
    edges = np.unique(np.clip(edges, ta, tb)).tolist()
    heap = []
    total = 0.0
    err = 0.0
    for lo, hi in zip(edges[:-1], edges[1:]):
        v, e = panel(lo, hi)
        total += v
        err += e
        heapq.heappush(heap, (-e, lo, hi, v))
    n = len(heap)
    while err > max(tol * abs(total), tol_abs):
        if n >= max_intervals:
            raise NumericalError("subdivision limit reached", residual=err, estimate=total)
        e_neg, lo, hi, v = heapq.heappop(heap)
        mid = 0.5 * (lo + hi)
        v1, e1 = panel(lo, mid)
        v2, e2 = panel(mid, hi)
        total += v1 + v2 - v
        err += e1 + e2 + e_neg
        heapq.heappush(heap, (-e1, lo, mid, v1))
        heapq.heappush(heap, (-e2, mid, hi, v2))
        n += 1
    err = sum(-item[0] for item in heap)
    return total, err
