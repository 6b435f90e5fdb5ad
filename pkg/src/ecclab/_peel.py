"""Selects the peeling kernel: compiled if it imports, numpy otherwise.

Set ``ECCLAB_PURE_PYTHON=1`` to force the fallback.
"""

import os

from . import _peel_py

if os.environ.get("ECCLAB_PURE_PYTHON"):
    peel_residual = _peel_py.peel_residual
    BACKEND = "python"
else:
    try:
        from ._kernels import peel_residual
        BACKEND = "cython"
    except ImportError:
        peel_residual = _peel_py.peel_residual
        BACKEND = "python"
