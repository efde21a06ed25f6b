"""Hot reductions over node stencils.

The compiled extension is used when it was built; otherwise (or when
``NSREG_PURE_PYTHON=1``) the NumPy fallback is selected.  Both backends take
C-contiguous float64 arrays and ``intp`` index arrays.
"""

import os

from . import _pykernels as python_backend

BACKEND = "python"
compiled_backend = None

if os.environ.get("NSREG_PURE_PYTHON") != "1":
    try:
        from . import _ckernels as compiled_backend

        BACKEND = "cython"
    except ImportError:  # extension not built
        compiled_backend = None

_impl = compiled_backend if compiled_backend is not None else python_backend

power_sum = _impl.power_sum
max_norm = _impl.max_norm
weighted_sum = _impl.weighted_sum
slice_sums = _impl.slice_sums

__all__ = [
    "BACKEND",
    "compiled_backend",
    "python_backend",
    "power_sum",
    "max_norm",
    "weighted_sum",
    "slice_sums",
]
