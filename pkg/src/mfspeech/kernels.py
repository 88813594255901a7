"""Backend selection for the hot loops.

The compiled Cython module is used when it imports; otherwise the NumPy
fallback. ``MFSPEECH_BACKEND=python`` forces the fallback,
``MFSPEECH_BACKEND=cython`` makes a missing extension an import error.
"""

import os

import numpy as np

from . import _pykernels

try:
    from . import _ckernels
except ImportError:  # extension not built
    _ckernels = None

_BACKENDS = {"python": _pykernels}
if _ckernels is not None:
    _BACKENDS["cython"] = _ckernels

_requested = os.environ.get("MFSPEECH_BACKEND", "").strip().lower()
if _requested == "cython" and _ckernels is None:
    raise ImportError("MFSPEECH_BACKEND=cython but mfspeech._ckernels is not built")
if _requested and _requested not in ("python", "cython"):
    raise ImportError(f"unknown MFSPEECH_BACKEND {_requested!r}")

BACKEND = _requested or ("cython" if _ckernels is not None else "python")
_impl = _BACKENDS[BACKEND]


def available_backends():
    return sorted(_BACKENDS)


def get_backend(name=None):
    """Kernel module by name (``None`` for the active one)."""
    if name is None:
        return _impl
    try:
        return _BACKENDS[name]
    except KeyError:
        raise ValueError(f"backend {name!r} not available; have {available_backends()}") from None


def segment_f2(profile, s, basis, from_end=False):
    y = np.ascontiguousarray(profile, dtype=np.float64)
    return _impl.segment_f2(y, int(s), np.ascontiguousarray(basis, dtype=np.float64), bool(from_end))


def correlate(x, kernel, periodic):
    return _impl.correlate(x, kernel, periodic)


def local_maxima(a, floor):
    return _impl.local_maxima(a, floor)
