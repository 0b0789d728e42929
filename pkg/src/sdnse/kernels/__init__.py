"""Interpolation kernels: compiled extension when available, numpy fallback.

Set SDNSE_NO_EXT=1 to force the pure-Python path (used by the benchmark
and by tests that compare the two implementations).
"""

import os

from . import _reference

if os.environ.get("SDNSE_NO_EXT"):
    _impl = _reference
    BACKEND = "python"
else:
    try:
        from . import _core as _impl
        BACKEND = "compiled"
    except ImportError:
        _impl = _reference
        BACKEND = "python"

interp_linear = _impl.interp_linear
interp_linear_periodic = _impl.interp_linear_periodic

__all__ = ["interp_linear", "interp_linear_periodic", "BACKEND"]
