"""Selects the compiled sweep kernels when available.

Set ``TPHEN_PURE_PYTHON=1`` to force the pure-Python implementations.
"""

import os

from . import _pykernels

BACKEND = "python"

if os.environ.get("TPHEN_PURE_PYTHON", "") not in ("1", "true", "yes"):
    try:
        from . import _ckernels as _impl

        BACKEND = "cython"
    except ImportError:
        _impl = _pykernels
else:
    _impl = _pykernels

maximal_range = _impl.maximal_range
coalesce = _impl.coalesce
intersection = _impl.intersection
complement = _impl.complement
before_disjoint = _impl.before_disjoint

__all__ = [
    "BACKEND",
    "maximal_range",
    "coalesce",
    "intersection",
    "complement",
    "before_disjoint",
]
