"""Switch between numba-compiled kernels and their numpy fallbacks.

Set ``QINTERP_DISABLE_NUMBA=1`` before import to force the numpy path
(useful for debugging and for the benchmark comparison).
"""

import os

_FLAG = os.environ.get("QINTERP_DISABLE_NUMBA", "").strip().lower()
USE_NUMBA = _FLAG not in ("1", "true", "yes", "on")

if USE_NUMBA:
    try:
        import numba
    except ImportError:  # pragma: no cover - numba is a hard dependency
        USE_NUMBA = False


def maybe_njit(*args, **kwargs):
    """``numba.njit`` when acceleration is enabled, identity otherwise."""
    if args and callable(args[0]) and len(args) == 1 and not kwargs:
        func = args[0]
        return numba.njit(cache=True, nogil=True)(func) if USE_NUMBA else func

    def wrap(func):
        if not USE_NUMBA:
            return func
        opts = {"cache": True, "nogil": True}
        opts.update(kwargs)
        return numba.njit(**opts)(func)

    return wrap
