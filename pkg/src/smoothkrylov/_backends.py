"""Kernel backend selection.

The environment variable ``SMOOTHKRYLOV_BACKEND`` picks the kernel
implementation at import time:

* ``auto`` (default, also "") -- numba when importable, else numpy
* ``numba`` -- require the compiled kernels, raise if numba is missing
* ``numpy`` -- force the pure-numpy reference kernels

Both backends expose identical call signatures; see ``_kernels_numpy``
for the reference semantics.
"""

import os

from .errors import ConfigurationError

_requested = os.environ.get("SMOOTHKRYLOV_BACKEND", "auto").strip().lower() or "auto"

try:
    from . import _kernels_numba

    HAS_NUMBA = True
except ImportError:  # pragma: no cover - depends on environment
    _kernels_numba = None
    HAS_NUMBA = False

from . import _kernels_numpy

if _requested == "auto":
    ACTIVE_BACKEND = "numba" if HAS_NUMBA else "numpy"
elif _requested == "numba":
    if not HAS_NUMBA:
        raise ImportError(
            "SMOOTHKRYLOV_BACKEND=numba was requested but numba is not importable"
        )
    ACTIVE_BACKEND = "numba"
elif _requested == "numpy":
    ACTIVE_BACKEND = "numpy"
else:
    raise ConfigurationError(
        f"invalid SMOOTHKRYLOV_BACKEND={_requested!r}; use 'auto', 'numba', or 'numpy'"
    )

_impl = _kernels_numba if ACTIVE_BACKEND == "numba" else _kernels_numpy

csr_block_product = _impl.csr_block_product
frobenius_inner_kernel = _impl.frobenius_inner


def get_backend_info():
    """Report which kernel backend is active and why."""
    return {
        "backend": ACTIVE_BACKEND,
        "requested": _requested,
        "numba_available": HAS_NUMBA,
    }
