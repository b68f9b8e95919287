"""Optional numba acceleration for the hot loops.

Kernels are written once in numba-compatible Python. Setting
``RANSIM_DISABLE_NUMBA=1`` (or running without numba installed) keeps them
as plain Python functions over numpy arrays, which is slower but produces
identical decisions.
"""

import os

_DISABLED = os.environ.get("RANSIM_DISABLE_NUMBA", "").strip().lower() in {"1", "true", "yes", "on"}

try:
    if _DISABLED:
        raise ImportError
    from numba import njit as _njit

    HAVE_NUMBA = True
except ImportError:
    _njit = None
    HAVE_NUMBA = False


def jit(func):
    """``njit(cache=True)`` when acceleration is on, identity otherwise."""
    if not HAVE_NUMBA:
        return func
    return _njit(cache=True)(func)


def backend():
    return "numba" if HAVE_NUMBA else "python"
