"""Kernel backend selection.

The compiled extension is used when importable; set ``MMFUSION_PURE_PYTHON=1``
to force the numpy fallback.
"""
import os

from . import _kernels_py

BACKEND = "python"
_impl = _kernels_py

if os.environ.get("MMFUSION_PURE_PYTHON", "") != "1":
    try:
        from . import _kernels as _impl  # type: ignore[no-redef]

        BACKEND = "cython"
    except ImportError:
        _impl = _kernels_py


def available_backends():
    names = {"python": _kernels_py}
    try:
        from . import _kernels

        names["cython"] = _kernels
    except ImportError:
        pass
    return names


log_columns = _impl.log_columns
weighted_argmax = _impl.weighted_argmax
objective_terms = _impl.objective_terms
