"""Optional numba acceleration with a pure-numpy fallback.

The environment variable ``ADM_NUMBA`` controls kernel selection: any of
``0``, ``false``, ``no``, ``off`` (case-insensitive) forces the numpy path
even when numba is importable.  The decision is made once at import time.
"""

import os

NUMBA_ENV = "ADM_NUMBA"

_JIT_OPTIONS = {"cache": True, "nogil": True}


def _numba_wanted() -> bool:
    return os.environ.get(NUMBA_ENV, "1").strip().lower() not in (
        "0", "false", "no", "off",
    )


HAS_NUMBA = False
if _numba_wanted():
    try:
        from numba import njit as _njit
        HAS_NUMBA = True
    except ImportError:
        _njit = None

if HAS_NUMBA:
    def njit(func):
        return _njit(**_JIT_OPTIONS)(func)
else:
    def njit(func):
        return func
