"""Kernel backend selection: numba-jitted or pure numpy.

The hot numeric kernels (per-family log-density evaluation, driven tens of
thousands of times per maximum-likelihood fit) are compiled with numba when
available.  Set ``DISTFIT_BACKEND=numpy`` to force the pure-numpy path, e.g.
on platforms without a working numba install or to compare results between
the two paths (see ``benchmarks/bench_backends.py``).
"""

from __future__ import annotations

import os

_FORCED_NUMPY = os.environ.get("DISTFIT_BACKEND", "").strip().lower() in (
    "numpy",
    "python",
    "off",
    "0",
)

try:
    from numba import njit as _njit

    NUMBA_AVAILABLE = True
except ImportError:  # pragma: no cover - exercised via DISTFIT_BACKEND instead
    _njit = None
    NUMBA_AVAILABLE = False

NUMBA_ENABLED = NUMBA_AVAILABLE and not _FORCED_NUMPY


def jit_kernel(fn):
    """Compile ``fn`` with numba regardless of the active backend.

    Raises RuntimeError when numba is not importable; callers should check
    ``NUMBA_AVAILABLE`` first.
    """
    if not NUMBA_AVAILABLE:
        raise RuntimeError("numba is not available")
    return _njit(cache=True, fastmath=False)(fn)


def maybe_jit(fn):
    """Return the jitted ``fn`` on the numba backend, ``fn`` itself otherwise."""
    if NUMBA_ENABLED:
        return jit_kernel(fn)
    return fn
