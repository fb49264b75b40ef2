"""Kernel backend selection.

The compiled Cython core (``swarmsafe._core``) is preferred when it was built;
otherwise the NumPy fallback is used. The environment variable
``SWARMSAFE_KERNELS`` (``"compiled"`` or ``"numpy"``) forces a backend at
import time, and :func:`use` switches it at run time (handy for benchmarks
and tests).
"""

import os

from . import _kernels_np
from .errors import ParameterError

try:
    from . import _core
except ImportError:  # extension not built; NumPy fallback still works
    _core = None

_IMPLS = {"numpy": _kernels_np}
if _core is not None:
    _IMPLS["compiled"] = _core


def available():
    """Names of the selectable backends."""
    return tuple(sorted(_IMPLS))


def active():
    """Name of the backend used by the dispatch functions below."""
    return _active_name


def use(name):
    """Select a backend by name; returns the previously active name."""
    global _active_name, _active
    if name not in _IMPLS:
        raise ParameterError(f"unknown kernel backend {name!r}; available: {available()}")
    previous = _active_name
    _active_name = name
    _active = _IMPLS[name]
    return previous


def _initial_backend():
    forced = os.environ.get("SWARMSAFE_KERNELS")
    if forced:
        if forced not in _IMPLS:
            raise ImportError(
                f"SWARMSAFE_KERNELS={forced!r} but that backend is unavailable; "
                f"available: {available()}"
            )
        return forced
    return "compiled" if "compiled" in _IMPLS else "numpy"


_active_name = _initial_backend()
_active = _IMPLS[_active_name]


def gaussian_field(nx, ny, cell, ox, oy, cx, cy, pxx, pxy, pyy):
    return _active.gaussian_field(nx, ny, cell, ox, oy, cx, cy, pxx, pxy, pyy)


def uniform_matvec(indices, data, x):
    return _active.uniform_matvec(indices, data, x)


def uniform_rows_matvec(indices, data, x, rows):
    return _active.uniform_rows_matvec(indices, data, x, rows)
