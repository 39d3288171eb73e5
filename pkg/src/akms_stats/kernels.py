"""Kernel dispatch: compiled extension when built, NumPy fallback otherwise.

Set ``AKMS_PURE_PYTHON=1`` to force the fallback.
"""

import os

from . import _kernels_py

BACKEND = "python"
if os.environ.get("AKMS_PURE_PYTHON", "") not in ("1", "true", "yes"):
    try:
        from . import _kernels as _impl

        BACKEND = "cython"
    except ImportError:  # extension not built
        _impl = _kernels_py
else:
    _impl = _kernels_py

log_hyp1f1_pos = _impl.log_hyp1f1_pos

__all__ = ["BACKEND", "log_hyp1f1_pos"]
