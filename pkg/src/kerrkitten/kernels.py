"""Backend selection for the grid kernels.

The compiled extension is used when it imports; otherwise, or when the
environment variable ``KERRKITTEN_PURE_PYTHON`` is set to a non-empty value
other than ``0``, the numpy implementation is used.
"""

import os

from . import _pykernels

_force_py = os.environ.get("KERRKITTEN_PURE_PYTHON", "") not in ("", "0")

if _force_py:
    _impl = _pykernels
    BACKEND = "python"
else:
    try:
        from . import _kernels as _impl
        BACKEND = "compiled"
    except ImportError:  # extension not built
        _impl = _pykernels
        BACKEND = "python"

quasi_grid = _impl.quasi_grid
quasi_diag_grid = _impl.quasi_diag_grid
husimi_pure_grid = _impl.husimi_pure_grid
pairwise_sum = _impl.pairwise_sum


def get_backend(name):
    """Return the kernel module for ``"compiled"`` or ``"python"``."""
    if name == "python":
        return _pykernels
    if name == "compiled":
        from . import _kernels
        return _kernels
    raise ValueError(f"unknown backend {name!r}")
