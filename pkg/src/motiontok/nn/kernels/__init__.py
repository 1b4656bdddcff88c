"""Kernel backend selection.

The compiled extension is used when importable; set MOTIONTOK_KERNELS=python
to force the numpy fallback or =cython to require the extension.
"""

import os

from . import numpy_backend

_choice = os.environ.get("MOTIONTOK_KERNELS", "auto").lower()

if _choice == "python":
    _impl = numpy_backend
    BACKEND = "python"
else:
    try:
        from . import _fastconv as _impl  # type: ignore[no-redef]

        BACKEND = "cython"
    except ImportError:
        if _choice == "cython":
            raise
        _impl = numpy_backend
        BACKEND = "python"

conv1d_fwd = _impl.conv1d_fwd
conv1d_bwd = _impl.conv1d_bwd
convtr1d_fwd = _impl.convtr1d_fwd
convtr1d_bwd = _impl.convtr1d_bwd

__all__ = [
    "BACKEND",
    "conv1d_fwd",
    "conv1d_bwd",
    "convtr1d_fwd",
    "convtr1d_bwd",
    "numpy_backend",
]
