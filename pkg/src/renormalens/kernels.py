"""Backend selection for the hot kernels.

The compiled extension is used when it imports; otherwise the numpy
fallback is used. Set ``RENORMALENS_PURE_PYTHON=1`` to force the fallback.
"""
import os

from . import _kernels_py

BACKEND = "python"
_impl = _kernels_py

if os.environ.get("RENORMALENS_PURE_PYTHON", "") not in ("1", "true", "yes"):
    try:
        from . import _kernels as _compiled
    except ImportError:  # extension not built
        pass
    else:
        _impl = _compiled
        BACKEND = "cython"

log_divided_difference = _impl.log_divided_difference
logarithmic_mean = _impl.logarithmic_mean
gaussian_kernel = _impl.gaussian_kernel
hermite_product_sums = _impl.hermite_product_sums

__all__ = [
    "BACKEND",
    "log_divided_difference",
    "logarithmic_mean",
    "gaussian_kernel",
    "hermite_product_sums",
]
