"""JIT selection.

Hot kernels are written as plain Python over numpy arrays and compiled with
numba when it is importable and ``VCG_LAB_DISABLE_NUMBA`` is unset (or "0").
With the flag set, the same functions run interpreted, which is the reference
path the benchmark compares against.
"""

import os

_FLAG = "VCG_LAB_DISABLE_NUMBA"


def _numba_requested():
    return os.environ.get(_FLAG, "0").strip().lower() in ("", "0", "false", "no")


try:
    import numba as _numba
except ImportError:  # pragma: no cover - numba is a declared dependency
    _numba = None

NUMBA_ENABLED = _numba is not None and _numba_requested()


def njit(func):
    """Compile ``func`` with numba when enabled, else return it unchanged.

    The interpreted original stays reachable as ``.py_func`` either way.
    """
    if not NUMBA_ENABLED:
        func.py_func = func
        return func
    return _numba.njit(cache=True, nogil=True)(func)
