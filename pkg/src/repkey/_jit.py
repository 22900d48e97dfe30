"""Optional numba acceleration.

Set ``REPKEY_DISABLE_NUMBA=1`` to force the pure-numpy code paths. The flag is
read once at import time.
"""
import os

__all__ = ("njit", "USE_NUMBA", "backend")

_flag = os.environ.get("REPKEY_DISABLE_NUMBA", "").strip().lower()
_disabled = _flag not in ("", "0", "false", "no")

try:
    import numba
except ImportError:  # pragma: no cover - numba is a declared dependency
    numba = None

USE_NUMBA = numba is not None and not _disabled

njit_kwargs = {"nogil": True, "cache": False}


def njit(f):
    """Compile ``f`` with numba when available, otherwise return it unchanged."""
    if numba is None:
        return f
    return numba.njit(**njit_kwargs)(f)


def backend():
    return "numba" if USE_NUMBA else "numpy"
