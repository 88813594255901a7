"""Scale and moment-order grids."""

import numpy as np

from .errors import InvalidGrid


def log_scales(lo, hi, count):
    """``count`` log-spaced integer scales in ``[lo, hi]``, duplicates removed."""
    if lo < 1 or hi < lo:
        raise InvalidGrid(f"invalid scale bounds [{lo}, {hi}]")
    s = np.round(np.logspace(np.log10(lo), np.log10(hi), int(count))).astype(np.int64)
    return np.unique(s)


def dyadic_scales(lo, hi):
    """Powers of two within ``[lo, hi]``."""
    if lo < 1 or hi < lo:
        raise InvalidGrid(f"invalid scale bounds [{lo}, {hi}]")
    k0 = int(np.ceil(np.log2(lo) - 1e-12))
    k1 = int(np.floor(np.log2(hi) + 1e-12))
    return 2 ** np.arange(k0, k1 + 1, dtype=np.int64)


def make_scales(lo, hi, count, spacing="log"):
    if spacing == "dyadic":
        return dyadic_scales(lo, hi)
    return log_scales(lo, hi, count)


def q_grid(q_min, q_max, step):
    """Evenly spaced moment orders including both ends.

    Values are snapped to multiples of ``step`` so that 0 is hit exactly
    when it lies on the grid.
    """
    n = int(round((q_max - q_min) / step))
    qs = q_min + step * np.arange(n + 1)
    qs = np.round(qs / step) * step
    qs[np.abs(qs) < 0.5 * step * 1e-9] = 0.0
    return qs


def check_scales(scales, *, min_scale=1, max_scale=None, min_count=1):
    s = np.asarray(scales)
    if s.ndim != 1 or s.size < min_count:
        raise InvalidGrid(f"need at least {min_count} scales, got {s.size}")
    if not np.all(np.diff(s) > 0):
        raise InvalidGrid("scales must be strictly increasing")
    if np.any(s != np.round(s)):
        raise InvalidGrid("scales must be integers")
    if s[0] < min_scale:
        raise InvalidGrid(f"smallest scale {s[0]} is below the minimum {min_scale}")
    if max_scale is not None and s[-1] > max_scale:
        raise InvalidGrid(f"largest scale {s[-1]} exceeds the maximum {max_scale}")
    return s.astype(np.int64)


def check_qs(qs):
    q = np.asarray(qs, dtype=np.float64)
    if q.ndim != 1 or q.size < 1 or not np.all(np.isfinite(q)):
        raise InvalidGrid("q grid must be a nonempty finite sequence")
    if not np.all(np.diff(q) > 0):
        raise InvalidGrid("q grid must be strictly increasing")
    return q
