"""Backend selection for the hot kernels.

Every hot loop in the package exists twice: a scalar-loop version compiled
with numba, and a vectorised pure-numpy version.  The numba path is used
when numba imports and ``AIRYEDGE_PURE_NUMPY`` is unset (or ``0``).
"""

from __future__ import annotations

import contextlib
import os

try:
    import numba
except ImportError:  # pragma: no cover - numba is optional
    numba = None

HAVE_NUMBA = numba is not None

_FLAG = os.environ.get("AIRYEDGE_PURE_NUMPY", "").strip().lower()
_backend = "numpy" if (_FLAG not in ("", "0", "false", "no") or not HAVE_NUMBA) else "numba"


def njit(*args, **kwargs):
    """``numba.njit`` with caching and GIL release, or a no-op without numba."""
    kwargs.setdefault("cache", True)
    kwargs.setdefault("nogil", True)
    if not HAVE_NUMBA:
        if args and callable(args[0]):
            return args[0]
        return lambda f: f
    return numba.njit(*args, **kwargs)


def backend() -> str:
    return _backend


def set_backend(name: str) -> None:
    global _backend
    if name not in ("numba", "numpy"):
        raise ValueError(f"unknown backend {name!r}")
    if name == "numba" and not HAVE_NUMBA:
        raise RuntimeError("numba is not installed")
    _backend = name


@contextlib.contextmanager
def use_backend(name: str):
    previous = _backend
    set_backend(name)
    try:
        yield
    finally:
        set_backend(previous)


def use_numba() -> bool:
    return _backend == "numba"
