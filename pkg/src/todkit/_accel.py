"""Numba acceleration switch.

Hot kernels are written as plain functions over numpy arrays and wrapped
with ``numba.njit`` when acceleration is enabled.  Setting the environment
variable ``TODKIT_NO_NUMBA`` to a non-empty value other than ``0`` selects
the pure-Python/numpy fallback path (also used automatically when numba is
not importable).  The fallback computes bit-identical results, only slower.
"""

from __future__ import annotations

import os


def _detect() -> bool:
    flag = os.environ.get("TODKIT_NO_NUMBA", "").strip()
    if flag not in ("", "0"):
        return False
    try:
        import numba  # noqa: F401
    except ImportError:
        return False
    return True


NUMBA_ENABLED = _detect()


def maybe_njit(func):
    """Return ``njit(cache=True, nogil=True)(func)`` or ``func`` unchanged.

    ``nogil=True`` lets thread pools run compiled kernels concurrently.
    """
    if not NUMBA_ENABLED:
        return func
    from numba import njit

    return njit(cache=True, nogil=True)(func)
