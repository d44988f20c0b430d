"""Backend switch for the compiled kernels.

Set ``SEMIPASSIVE_DISABLE_NUMBA=1`` to force the pure-numpy path; it is also
used automatically when numba is not importable.
"""
import os

_FLAG = "SEMIPASSIVE_DISABLE_NUMBA"

try:
    import numba
except ImportError:  # pragma: no cover - numba is a declared dependency
    numba = None

HAVE_NUMBA = numba is not None
USE_NUMBA = HAVE_NUMBA and os.environ.get(_FLAG, "").strip().lower() not in {"1", "true", "yes", "on"}


def njit(*args, **kwargs):
    """``numba.njit`` when available, otherwise the identity decorator."""
    if not HAVE_NUMBA:
        if len(args) == 1 and callable(args[0]) and not kwargs:
            return args[0]
        return lambda fn: fn
    return numba.njit(*args, **kwargs)
