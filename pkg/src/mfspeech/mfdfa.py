"""Multifractal detrended fluctuation analysis.

Profile, non-overlapping segmentation, polynomial detrending per segment,
q-order fluctuation function and its log-log slope h(q).
"""

from __future__ import annotations

import functools
from dataclasses import dataclass

import numpy as np

from . import kernels
from .audio_io import TimeSeries
from .config import AnalysisConfig
from .errors import DegenerateFit, InvalidGrid, TooShort, ZeroLocalFluctuation
from .grids import check_qs, check_scales, make_scales, q_grid
from .spectrum import (
    HurstSpectrum,
    MultifractalResult,
    legendre,
    loglog_slopes,
    quadratic_fit,
    tau_from_h,
)

__all__ = [
    "FluctuationSurface",
    "HurstSpectrum",
    "detrend_basis",
    "fluctuation_function",
    "hurst_exponents",
    "local_fluctuation",
    "mfdfa_analyze",
    "mfdfa_scales",
    "profile",
    "segment_count",
]


@dataclass(frozen=True, eq=False)
class FluctuationSurface:
    qs: np.ndarray
    scales: np.ndarray
    values: np.ndarray  # (len(qs), len(scales))


def _as_array(x):
    if isinstance(x, TimeSeries):
        return x.samples
    return np.asarray(x, dtype=np.float64)


def profile(x) -> np.ndarray:
    """Cumulative sum of the mean-removed signal."""
    v = _as_array(x)
    if v.size < 2:
        raise TooShort(f"profile needs at least 2 samples, got {v.size}")
    return np.cumsum(v - v.mean())


def segment_count(n, s):
    return int(n) // int(s)


@functools.lru_cache(maxsize=256)
def detrend_basis(s, order):
    """Orthonormal basis of polynomials of degree <= ``order`` on ``0..s-1``."""
    if s < order + 2:
        raise DegenerateFit(f"segment of {s} samples cannot overdetermine order {order}")
    t = np.arange(s, dtype=np.float64)
    t = (t - t.mean()) / max(s - 1, 1)
    q, r = np.linalg.qr(np.vander(t, order + 1, increasing=True))
    if np.min(np.abs(np.diag(r))) < 1e-12:
        raise DegenerateFit(f"rank-deficient detrending basis for s={s}, order={order}")
    q.setflags(write=False)
    return q


def local_fluctuation(p, s, v, order=1):
    """F^2(s, v): mean squared residual of the ``v``-th segment (1-based)."""
    y = np.asarray(p, dtype=np.float64)
    ns = segment_count(y.size, s)
    if not 1 <= v <= ns:
        raise InvalidGrid(f"segment index {v} outside 1..{ns}")
    if s < order + 2:
        raise InvalidGrid(f"scale {s} must be at least order + 2 = {order + 2}")
    seg = y[(v - 1) * s : v * s]
    basis = detrend_basis(int(s), int(order))
    resid = seg - basis @ (basis.T @ seg)
    return float(resid @ resid / s)


def _segment_variances(y, s, order, bidirectional):
    basis = detrend_basis(int(s), int(order))
    f2 = kernels.segment_f2(y, s, basis, False)
    if bidirectional:
        f2 = np.concatenate([f2, kernels.segment_f2(y, s, basis, True)])
    return f2


def _power_means(f2, qs, zero_floor, scale):
    """Eq.-6 style q-order means of sqrt(F^2) evaluated in log space."""
    out = np.empty(qs.size)
    zero = f2 <= zero_floor
    with np.errstate(divide="ignore"):
        log_f2 = np.log(f2)
    n = f2.size
    for i, q in enumerate(qs):
        if q <= 0 and np.any(zero):
            seg = int(np.flatnonzero(zero)[0]) + 1
            raise ZeroLocalFluctuation(scale, seg)
        if q == 0:
            out[i] = np.exp(0.5 * np.mean(log_f2))
            continue
        if np.all(zero):
            raise ZeroLocalFluctuation(scale, 1)
        z = 0.5 * q * log_f2[~zero] if np.any(zero) else 0.5 * q * log_f2
        zmax = z.max()
        lse = zmax + np.log(np.sum(np.exp(z - zmax)))
        out[i] = np.exp((lse - np.log(n)) / q)
    return out


def fluctuation_function(p, scales, qs, order=1, bidirectional=False) -> FluctuationSurface:
    """q-order fluctuation function F_q(s) over the given grids.

    q = 0 uses the logarithmic mean ``exp(mean(ln F^2) / 2)``.
    """
    y = np.asarray(p, dtype=np.float64)
    qs = check_qs(qs)
    scales = check_scales(scales, min_scale=order + 2, max_scale=y.size)
    peak = float(np.max(np.abs(y))) if y.size else 0.0
    zero_floor = (64.0 * np.finfo(float).eps * peak) ** 2
    values = np.empty((qs.size, scales.size))
    for j, s in enumerate(scales):
        f2 = _segment_variances(y, int(s), order, bidirectional)
        values[:, j] = _power_means(f2, qs, zero_floor, int(s))
    return FluctuationSurface(qs, scales, values)


def hurst_exponents(F: FluctuationSurface) -> HurstSpectrum:
    if F.scales.size < 4:
        raise InvalidGrid(f"h(q) regression needs at least 4 scales, got {F.scales.size}")
    slopes, _, r2 = loglog_slopes(F.scales, np.log(F.values))
    return HurstSpectrum(F.qs, slopes, r2)


def mfdfa_scales(n, cfg: AnalysisConfig):
    hi = cfg.mfdfa_scale_max or n // 4
    lo = cfg.mfdfa_scale_min
    if hi < lo:
        raise TooShort(f"signal of {n} samples is too short for MFDFA scales from {lo}")
    return make_scales(lo, hi, cfg.mfdfa_n_scales, cfg.mfdfa_spacing)


def mfdfa_analyze(x, cfg: AnalysisConfig | None = None, *, scales=None, qs=None) -> MultifractalResult:
    """Full MFDFA pipeline from samples to the fitted singularity spectrum."""
    cfg = cfg or AnalysisConfig()
    v = _as_array(x)
    n = v.size
    if n < 4 * cfg.mfdfa_scale_min:
        raise TooShort(f"MFDFA needs at least {4 * cfg.mfdfa_scale_min} samples, got {n}")
    if scales is None:
        scales = mfdfa_scales(n, cfg)
    scales = check_scales(scales, min_scale=cfg.detrend_order + 2, max_scale=n // 4, min_count=4)
    if qs is None:
        qs = q_grid(cfg.mfdfa_q_min, cfg.mfdfa_q_max, cfg.mfdfa_q_step)

    y = profile(v)
    if not np.any(y):
        raise ZeroLocalFluctuation(int(scales[0]), 1, "constant signal: profile is identically zero")
    F = fluctuation_function(y, scales, qs, cfg.detrend_order, cfg.bidirectional)
    h = hurst_exponents(F)
    tau = tau_from_h(h)
    spec = legendre(tau, source="mfdfa")
    fit = quadratic_fit(spec, cfg.fit_min_f, cfg.fit_min_points)
    return MultifractalResult(
        method="mfdfa",
        qs=F.qs,
        scales=F.scales,
        surface=F.values,
        tau=tau,
        spectrum=spec,
        fit=fit,
        hurst=h,
        metadata={"detrend_order": cfg.detrend_order, "bidirectional": cfg.bidirectional},
    )
