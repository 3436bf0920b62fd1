"""Numba switch.

Set ``QNSC_DISABLE_NUMBA=1`` to skip compilation entirely; the kernels then
dispatch to their vectorised numpy implementations.
"""
import os

_FLAG = os.environ.get("QNSC_DISABLE_NUMBA", "").strip().lower()
DISABLED = _FLAG not in ("", "0", "false", "no")

try:
    if DISABLED:
        raise ImportError
    import numba
except ImportError:
    numba = None

HAVE_NUMBA = numba is not None


def jit(fn):
    """``numba.njit(cache=True)`` when available, identity otherwise."""
    if numba is None:
        return fn
    return numba.njit(cache=True, nogil=True)(fn)
