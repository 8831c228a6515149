"""Kernel backend selection.

The compiled extension is used when it imports; otherwise the pure-Python
twin. Set ``PCTSP_PURE_PYTHON=1`` to force the fallback.
"""
import os

from . import _pykernels

BACKEND = "python"
if not os.environ.get("PCTSP_PURE_PYTHON"):
    try:
        from . import _kernels as _impl

        BACKEND = "cython"
    except ImportError:  # extension not built
        _impl = _pykernels
else:
    _impl = _pykernels

held_karp = _impl.held_karp
matching_dp = _impl.matching_dp


def backends():
    """Mapping of available backend name -> module."""
    found = {"python": _pykernels}
    try:
        from . import _kernels

        found["cython"] = _kernels
    except ImportError:
        pass
    return found
