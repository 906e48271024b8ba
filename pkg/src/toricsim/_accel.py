"""Numba acceleration shim.

Hot kernels throughout the package are decorated with :func:`njit` from this
module.  By default the decorator is numba's ``@njit(cache=True)``.  Setting
the environment variable ``TORICSIM_NUMBA=0`` (or ``false`` / ``off``), or
running without numba installed, swaps in an identity decorator so every
kernel executes as plain Python/numpy.  Both paths run the same source, so
results are identical up to floating-point library differences.

Every kernel keeps a ``py_func`` attribute pointing at the uncompiled
function (numba provides this natively; the fallback decorator adds it), so
tests and benchmarks can compare both backends in one process.
"""

from __future__ import annotations

import os


def _numba_requested() -> bool:
    flag = os.environ.get("TORICSIM_NUMBA", "1").strip().lower()
    return flag not in ("0", "false", "off", "no")


NUMBA_ENABLED = False
if _numba_requested():
    try:
        import numba as _numba

        NUMBA_ENABLED = True
    except ImportError:  # pragma: no cover - numba is a hard dep, but be safe
        NUMBA_ENABLED = False


if NUMBA_ENABLED:

    def njit(func=None, **kwargs):
        kwargs.setdefault("cache", True)
        if func is None:
            return _numba.njit(**kwargs)
        return _numba.njit(**kwargs)(func)

else:

    def njit(func=None, **kwargs):
        def wrap(f):
            f.py_func = f
            return f

        if func is None:
            return wrap
        return wrap(func)


def backend_name() -> str:
    """Name of the active kernel backend, for manifests and benchmarks."""
    return "numba" if NUMBA_ENABLED else "python"
