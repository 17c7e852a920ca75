"""Optional numba acceleration.

Set ``QCTREE_NO_NUMBA=1`` before import to force the pure-numpy paths.
"""
import os

USE_NUMBA = os.environ.get("QCTREE_NO_NUMBA", "").lower() not in ("1", "true", "yes")

if USE_NUMBA:
    try:
        import numba
    except ImportError:  # pragma: no cover
        USE_NUMBA = False


def jit(fn):
    """Compile ``fn`` with numba in nopython mode, or return it unchanged."""
    if USE_NUMBA:
        return numba.njit(cache=True, nogil=True)(fn)
    return fn
