"""Optional numba acceleration.

Set ``EVERETT_DISABLE_NUMBA=1`` to force the pure-numpy code paths (useful
for debugging, since jitted tracebacks are hard to read, or on platforms
without numba).
"""

import os

_FLAG = "EVERETT_DISABLE_NUMBA"

try:
    import numba
except ImportError:  # pragma: no cover - numba is a declared dependency
    numba = None

HAVE_NUMBA = numba is not None
USE_NUMBA = HAVE_NUMBA and os.environ.get(_FLAG, "").strip().lower() not in ("1", "true", "yes", "on")


def njit(func):
    """``numba.njit(cache=True, nogil=True)`` when enabled, else the plain function."""
    if not USE_NUMBA:
        return func
    return numba.njit(cache=True, nogil=True)(func)
