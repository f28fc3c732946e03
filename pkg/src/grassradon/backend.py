"""Kernel backend selection.

GRASSRADON_BACKEND=numpy forces the pure-numpy path, =numba requires the
jitted path (raising if numba is absent); anything else autodetects.
The active backend is fixed at import time; `set_backend` exists for the
benchmark script and tests.
"""

import os

from . import _kernels_numpy

_BACKENDS = {"numpy": _kernels_numpy}
try:
    from . import _kernels_numba

    _BACKENDS["numba"] = _kernels_numba
    _HAVE_NUMBA = True
except ImportError:
    _HAVE_NUMBA = False

_active_name = None
_active = None


def set_backend(name):
    global _active_name, _active
    if name == "auto":
        name = "numba" if _HAVE_NUMBA else "numpy"
    if name not in _BACKENDS:
        raise ValueError(f"backend {name!r} unavailable (have: {sorted(_BACKENDS)})")
    _active_name = name
    _active = _BACKENDS[name]
    return name


def backend_name():
    return _active_name


def matmul_batch(A, B, d):
    return _active.matmul_batch(A, B, d)


def orthonormalize_batch(X, d):
    return _active.orthonormalize_batch(X, d)


set_backend(os.environ.get("GRASSRADON_BACKEND", "auto").strip().lower())
