"""Numba switch.

Set ``BIHESS_DISABLE_JIT=1`` to run every kernel through its pure-numpy
implementation instead of the compiled loop version.  The flag is read once
at import time.
"""
import os

_FALSY = {"", "0", "false", "no", "off"}

JIT_DISABLED = os.environ.get("BIHESS_DISABLE_JIT", "").strip().lower() not in _FALSY

try:
    import numba as _numba
except ImportError:  # pragma: no cover - numba is a declared dependency
    _numba = None

HAVE_NUMBA = _numba is not None
USE_NUMBA = HAVE_NUMBA and not JIT_DISABLED


def njit(*args, **kwargs):
    """``numba.njit`` when numba is importable, identity decorator otherwise."""
    if HAVE_NUMBA:
        return _numba.njit(*args, **kwargs)
    if len(args) == 1 and callable(args[0]) and not kwargs:
        return args[0]

    def wrap(func):
        return func

    return wrap
