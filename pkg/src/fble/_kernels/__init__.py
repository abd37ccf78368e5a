"""Hot kernels, compiled when available.

The Cython extension ``_ckernels`` is preferred; the numpy versions in
``_pykernels`` are used when it is missing or when the environment
variable ``FBLE_PURE_PYTHON`` is set to a non-empty value other than 0.
"""

import os

from . import _pykernels

_force_py = os.environ.get("FBLE_PURE_PYTHON", "") not in ("", "0")

try:
    if _force_py:
        raise ImportError("pure-python kernels requested")
    from . import _ckernels as _impl

    COMPILED = True
except ImportError:
    _impl = _pykernels
    COMPILED = False

log_betainc = _impl.log_betainc
tie_profile = _impl.tie_profile
log_beta = _pykernels.log_beta

__all__ = ["COMPILED", "log_betainc", "tie_profile", "log_beta"]
