"""Import-time selection of the sampling backend.

The compiled extension is preferred; the pure-numpy fallback is used when the
extension was not built or when CERTLAB_PURE_PYTHON is set (useful for
benchmarking and debugging).  Both expose the same functions and consume the
same random stream.
"""

from __future__ import annotations

import os

if os.environ.get("CERTLAB_PURE_PYTHON"):
    from . import _kernels_py as kernels

    BACKEND = "python"
else:
    try:
        from . import _kernels as kernels  # type: ignore[no-redef]

        BACKEND = "cython"
    except ImportError:
        from . import _kernels_py as kernels  # type: ignore[no-redef]

        BACKEND = "python"


def backend_name() -> str:
    """Name of the active sampling backend ("cython" or "python")."""
    return BACKEND
