"""Hot numeric kernels with two interchangeable backends.

``_jit`` holds numba ``@njit`` versions, ``_py`` holds numpy / pure-Python
versions. Set ``MATHIR_DISABLE_NUMBA=1`` before import to force the fallback;
it is also used automatically when numba cannot be imported. Both backends
return identical integers for the string kernels and agree to rounding on
the floating-point ones.
"""

import os

from mathir.kernels import _py

BACKEND = "numpy"
if os.environ.get("MATHIR_DISABLE_NUMBA", "").strip().lower() not in ("1", "true", "yes"):
    try:
        from mathir.kernels import _jit as _impl

        BACKEND = "numba"
    except ImportError:  # pragma: no cover - numba is a declared dependency
        _impl = _py
else:
    _impl = _py

lcs_length = _impl.lcs_length
partial_lcs_batch = _impl.partial_lcs_batch
bm25_accumulate = _impl.bm25_accumulate
moi_s_scores = _impl.moi_s_scores

__all__ = ["BACKEND", "lcs_length", "partial_lcs_batch", "bm25_accumulate", "moi_s_scores"]
