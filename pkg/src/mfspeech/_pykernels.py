"""Pure NumPy implementations of the hot loops.

Same signatures and results as the compiled ``_ckernels`` module; used when
the extension is not built or ``MFSPEECH_BACKEND=python`` is set.
"""

import numpy as np


def segment_f2(profile, s, basis, from_end=False):
    """Mean squared detrending residual of each non-overlapping segment.

    ``basis`` is an ``(s, order+1)`` matrix with orthonormal columns that
    spans the polynomials of the detrending order on ``0..s-1``.
    """
    y = np.asarray(profile, dtype=np.float64)
    ns = y.size // s
    if from_end:
        seg = y[y.size - ns * s :].reshape(ns, s)[::-1]
    else:
        seg = y[: ns * s].reshape(ns, s)
    resid = seg - (seg @ basis) @ basis.T
    return np.einsum("ij,ij->i", resid, resid) / s


def correlate(x, kernel, periodic):
    """``out[n] = sum_j x[n + j - K] * kernel[j]`` with ``K = len(kernel) // 2``.

    Periodic mode wraps indices and returns ``len(x)`` values; otherwise only
    positions whose kernel support lies inside ``x`` are returned.
    """
    x = np.asarray(x, dtype=np.float64)
    k = np.asarray(kernel, dtype=np.float64)
    half = k.size // 2
    if periodic:
        if k.size > x.size:
            raise ValueError("periodic correlation needs len(kernel) <= len(x)")
        x = np.concatenate([x[x.size - half :], x, x[: k.size - 1 - half]])
    elif k.size > x.size:
        # np.correlate would swap its arguments here
        return np.empty(0)
    return np.correlate(x, k, mode="valid")


def local_maxima(a, floor):
    """Indices ``i`` with ``a[i-1] < a[i] >= a[i+1]`` and ``a[i] >= floor``."""
    a = np.asarray(a, dtype=np.float64)
    if a.size < 3:
        return np.empty(0, dtype=np.intp)
    mid = a[1:-1]
    hit = (mid > a[:-2]) & (mid >= a[2:]) & (mid >= floor)
    return np.flatnonzero(hit) + 1
