"""Kernel backend selection.

Set ``QICCA_BACKEND=numpy`` to force the pure-numpy kernels; the default is
``numba`` whenever numba imports cleanly.
"""
import os

try:
    import numba

    HAVE_NUMBA = True
except ImportError:  # pragma: no cover
    numba = None
    HAVE_NUMBA = False


def _resolve():
    requested = os.environ.get("QICCA_BACKEND", "numba").strip().lower()
    if requested not in ("numba", "numpy"):
        raise RuntimeError(f"QICCA_BACKEND must be 'numba' or 'numpy', got {requested!r}")
    if requested == "numba" and not HAVE_NUMBA:
        return "numpy"
    return requested


BACKEND = _resolve()


def njit(*args, **kwargs):
    """``numba.njit`` when numba is present, identity decorator otherwise."""
    if HAVE_NUMBA:
        return numba.njit(*args, **kwargs)
    if len(args) == 1 and callable(args[0]) and not kwargs:
        return args[0]
    return lambda f: f
