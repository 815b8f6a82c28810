"""Kernel backend selection.

Hot numeric kernels ship in two equivalent implementations: numba ``@njit``
loops and vectorized pure numpy. The numba path is used when available;
setting the environment variable ``LEVYSID_NO_NUMBA=1`` (or a failed numba
import) selects the numpy path. The choice is made once at import time.

``benchmarks/bench_kernels.py`` compares the two paths on the same inputs.
"""

import os

_FLAG = os.environ.get("LEVYSID_NO_NUMBA", "").strip().lower()
_DISABLED = _FLAG in ("1", "true", "yes", "on")

if not _DISABLED:
    try:
        from numba import njit as _njit

        NUMBA_AVAILABLE = True
    except ImportError:  # pragma: no cover - exercised only without numba installed
        NUMBA_AVAILABLE = False
else:
    NUMBA_AVAILABLE = False


def backend_name():
    """Name of the active kernel backend: ``"numba"`` or ``"numpy"``."""
    return "numba" if NUMBA_AVAILABLE else "numpy"


def jit(func):
    """Compile ``func`` with numba when the numba backend is active.

    Returns the function unchanged on the numpy backend, so modules can
    decorate kernels unconditionally. ``cache=True`` keeps recompiles out of
    repeated short CLI runs; ``nogil=True`` lets thread workers overlap.
    """
    if NUMBA_AVAILABLE:
        return _njit(cache=True, nogil=True)(func)
    return func
