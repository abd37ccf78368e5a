"""Compiled versus pure-numpy kernels.

Run ``python benchmarks/bench_kernels.py``.  Both implementations are
imported directly, so the ``FBLE_PURE_PYTHON`` switch is irrelevant here.
"""

import time

import numpy as np

from fble._kernels import _pykernels

try:
    from fble._kernels import _ckernels
except ImportError:
    _ckernels = None


def _best(fn, repeat=3):
    times = []
    for _ in range(repeat):
        t = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t)
    return min(times)


def cases():
    rng = np.random.default_rng(0)
    v = rng.uniform(-0.999, 0.999, 200_000)
    x, xc = (1 - v) * (1 + v), v * v
    yield "log_betainc a=234.5 (2e5 pts)", lambda k: k.log_betainc(234.5, 0.5, x, xc)
    for N, M, n in [(10, 4, 2000), (14, 16, 100)]:
        words = rng.integers(0, 1 << N, size=(n, M))
        yield (f"tie_profile bsc N={N} M={M} ({n} codebooks)",
               lambda k, w=words, N=N: k.tie_profile(w, N, 0, 0))
        yield (f"tie_profile bec N={N} M={M} ({n} codebooks)",
               lambda k, w=words, N=N: k.tie_profile(w, N, 1, 0))


def main():
    print(f"{'kernel':<44}{'python [s]':>12}{'cython [s]':>12}{'speedup':>10}")
    for name, fn in cases():
        tp = _best(lambda: fn(_pykernels))
        if _ckernels is None:
            print(f"{name:<44}{tp:12.4f}{'n/a':>12}{'':>10}")
            continue
        tc = _best(lambda: fn(_ckernels))
        a, b = fn(_pykernels), fn(_ckernels)
        for u, w in zip(a if isinstance(a, tuple) else (a,), b if isinstance(b, tuple) else (b,)):
            np.testing.assert_allclose(u, w, rtol=1e-10, atol=1e-300)
        print(f"{name:<44}{tp:12.4f}{tc:12.4f}{tp / tc:10.1f}")


if __name__ == "__main__":
    main()
