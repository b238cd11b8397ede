"""Numba switch for the hot kernels.

Set ``CANMSG_DISABLE_NUMBA=1`` to run every kernel as plain Python/numpy.
The flag is read once at import time.
"""

from __future__ import annotations

import os

_FLAG = "CANMSG_DISABLE_NUMBA"


def _numba_requested() -> bool:
    return os.environ.get(_FLAG, "").strip().lower() not in {"1", "true", "yes", "on"}


try:
    import numba as _numba
except ImportError:  # pragma: no cover - numba is a declared dependency
    _numba = None

NUMBA_ENABLED: bool = _numba is not None and _numba_requested()


def njit(func=None, *, cache: bool = True):
    """Compile ``func`` with numba when enabled, else return it unchanged."""
    if func is None:
        return lambda f: njit(f, cache=cache)
    if NUMBA_ENABLED:
        return _numba.njit(cache=cache, nogil=True)(func)
    return func


def jit_always(func):
    """Compile regardless of the flag (used by the benchmark); None without numba."""
    if _numba is None:
        return None
    return _numba.njit(cache=True, nogil=True)(func)
