"""Numba switch.

Set ``LQGNEST_NO_NUMBA=1`` before import to run every hot kernel through its
vectorised numpy implementation instead of the compiled loop version. A
missing numba install selects the numpy path as well.
"""

import os
import types

USE_NUMBA = os.environ.get("LQGNEST_NO_NUMBA", "0").strip().lower() not in ("1", "true", "yes")

if USE_NUMBA:
    try:
        from numba import njit
    except ImportError:  # pragma: no cover
        USE_NUMBA = False

if not USE_NUMBA:  # pragma: no cover - exercised in the fallback job

    def njit(*args, **kwargs):
        if len(args) == 1 and callable(args[0]) and not kwargs:
            return args[0]

        def wrap(fn):
            return fn

        return wrap


def backend() -> str:
    return "numba" if USE_NUMBA else "numpy"


def kernels(name: str | None = None) -> types.ModuleType:
    """Module holding the hot loops for the requested or active backend."""
    name = name or backend()
    if name == "numba":
        if not USE_NUMBA:
            raise RuntimeError("numba backend requested but disabled")
        from . import _kernels

        return _kernels
    if name == "numpy":
        from . import _fallback

        return _fallback
    raise ValueError(f"unknown backend {name!r}")
