"""Optional numba acceleration.

Set ``NOMA_EE_NUMBA=0`` to force the pure-numpy kernels even when numba is
installed. The flag is read once, at import time.
"""
import os

_flag = os.environ.get("NOMA_EE_NUMBA", "1").strip().lower()
_requested = _flag not in ("0", "false", "no", "off")

try:
    import numba

    HAVE_NUMBA = True
except ImportError:  # pragma: no cover - depends on environment
    numba = None
    HAVE_NUMBA = False

USE_NUMBA = HAVE_NUMBA and _requested
BACKEND = "numba" if USE_NUMBA else "numpy"


def njit(*args, **kwargs):
    """``numba.njit`` when numba is importable, otherwise a no-op decorator.

    Compiled objects keep the plain Python function on ``.py_func`` either way,
    so both paths stay callable from tests.
    """
    if HAVE_NUMBA:
        return numba.njit(*args, **kwargs)

    def wrap(func):
        func.py_func = func
        return func

    if len(args) == 1 and callable(args[0]) and not kwargs:
        return wrap(args[0])
    return wrap
