"""Kernel backend selection.

The compiled extension is used when it imports; otherwise the pure-Python
module takes over. Set ``PRONY_LOWRANK_PURE=1`` to force the fallback.
"""

import os
import warnings

from . import _pykernels

try:
    if os.environ.get("PRONY_LOWRANK_PURE", "") not in ("", "0"):
        raise ImportError("pure-Python kernels forced by PRONY_LOWRANK_PURE")
    from . import _ckernels as _impl

    BACKEND = "cython"
except ImportError as exc:
    if "PRONY_LOWRANK_PURE" not in str(exc):
        warnings.warn(f"compiled kernels unavailable ({exc}); using pure Python")
    _impl = _pykernels
    BACKEND = "python"

nelder_mead = _impl.nelder_mead
max_abs_minor = _impl.max_abs_minor
moment_objective = _impl.moment_objective


def get_backend(name=None):
    """Return the kernel module for ``"cython"``, ``"python"`` or the default."""
    if name is None:
        return _impl
    if name == "python":
        return _pykernels
    if name == "cython":
        from . import _ckernels

        return _ckernels
    raise ValueError(f"unknown kernel backend {name!r}")
