"""JIT switch for the hot loops.

Set ``EEGADHD_DISABLE_JIT=1`` to run every kernel through its pure-numpy
path (useful for debugging under pdb, or where numba is unavailable).
The flag is read once at import time.
"""

import os

try:
    import numba
except ImportError:  # pragma: no cover - numba is a declared dependency
    numba = None

HAVE_NUMBA = numba is not None
JIT_ENABLED = HAVE_NUMBA and os.environ.get("EEGADHD_DISABLE_JIT", "").strip().lower() in (
    "", "0", "false", "no")


def njit(fn):
    """Always compile ``fn`` (when numba is importable), regardless of the flag."""
    if not HAVE_NUMBA:
        return fn
    return numba.njit(cache=True, nogil=True)(fn)


def jit(fn):
    """Compile ``fn`` only when the JIT is enabled; otherwise run it as plain Python/numpy."""
    return njit(fn) if JIT_ENABLED else fn


def pick(jit_impl, numpy_impl):
    return jit_impl if JIT_ENABLED else numpy_impl
