"""Numba backend toggle for the hot kernels.

Every performance-critical loop in this package is written as a plain
Python function over numpy arrays and wrapped with :func:`jit`. When numba
is importable (the default), :func:`jit` compiles in nopython mode with
on-disk caching; set the environment variable ``PERCOHMM_NUMBA=0`` before
import to run the identical source uncompiled. Both paths produce
bit-identical results because all randomness flows through the explicit
counter-based generator in :mod:`percohmm.rng`.
"""

import os

__all__ = ["NUMBA_ENABLED", "jit"]


def _numba_requested() -> bool:
    return os.environ.get("PERCOHMM_NUMBA", "1").lower() not in ("0", "false", "off")


NUMBA_ENABLED = False
if _numba_requested():
    try:
        from numba import njit as _njit

        NUMBA_ENABLED = True
    except ImportError:  # pragma: no cover - numba is a hard dep, but stay usable
        NUMBA_ENABLED = False


if NUMBA_ENABLED:

    def jit(func=None, **kwargs):
        kwargs.setdefault("cache", True)
        if func is None:
            return lambda f: _njit(**kwargs)(f)
        return _njit(**kwargs)(func)

else:

    def jit(func=None, **kwargs):
        if func is None:
            return lambda f: f
        return func
