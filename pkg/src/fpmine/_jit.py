"""Optional numba acceleration for the hot loops in :mod:`fpmine.kernels`.

Set ``FPMINE_NO_JIT=1`` in the environment to run the pure numpy/Python
fallbacks instead. The flag is read once, at import time.
"""

from __future__ import annotations

import os

try:
    import numba
except ImportError:  # pragma: no cover - numba is a declared dependency
    numba = None

_DISABLED = os.environ.get("FPMINE_NO_JIT", "").strip().lower() in {"1", "true", "yes", "on"}

NUMBA_AVAILABLE = numba is not None

#: True when the numba kernels are the ones dispatched by default.
JIT_ENABLED = numba is not None and not _DISABLED


def njit(fn):
    """Compile ``fn`` with numba when available; otherwise return it unchanged."""
    if numba is None:
        return fn
    return numba.njit(cache=True, nogil=True)(fn)
