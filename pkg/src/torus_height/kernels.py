"""Hot kernels: the compiled extension when built, else the pure-Python version.

Set ``TORUS_HEIGHT_PURE=1`` to force the fallback.
"""

import os

from . import _kernels_py

BACKEND = "python"
canonical_code = _kernels_py.canonical_code

if not os.environ.get("TORUS_HEIGHT_PURE"):
    try:
        from . import _kernels
    except ImportError:
        pass
    else:
        canonical_code = _kernels.canonical_code
        BACKEND = "cython"

__all__ = ["BACKEND", "canonical_code"]
