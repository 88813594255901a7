"""Synthetic test signals with known scaling properties.

All random generators draw from NumPy's PCG64 bit generator seeded through
``numpy.random.default_rng(seed)`` (SeedSequence expansion of the integer
seed). Gaussian variates use NumPy's ziggurat ``standard_normal``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .audio_io import TimeSeries
from .errors import EmbeddingNotPSD, InputError, NonPowerOfTwo, QZero


@dataclass(frozen=True)
class CascadeSpec:
    a: float
    levels: int

    def __post_init__(self):
        if not (0.5 <= self.a < 1):
            raise InputError(f"cascade multiplier must lie in [0.5, 1), got {self.a}")
        if int(self.levels) != self.levels or self.levels < 1:
            raise InputError(f"cascade levels must be a positive integer, got {self.levels}")


def _popcount(k):
    k = k.astype(np.uint64)
    n = np.zeros(k.shape, dtype=np.int64)
    while np.any(k):
        n += (k & np.uint64(1)).astype(np.int64)
        k >>= np.uint64(1)
    return n


def binomial_cascade(spec: CascadeSpec) -> TimeSeries:
    """Deterministic binomial multiplicative cascade of length ``2**levels``.

    Sample ``k`` (0-based) equals ``a**(levels-n) * (1-a)**n`` where ``n`` is
    the number of set bits of ``k``: every split hands the fraction ``a`` to
    the left half, so the heaviest sample comes first.
    """
    n = _popcount(np.arange(2**spec.levels, dtype=np.uint64))
    x = spec.a ** (spec.levels - n) * (1.0 - spec.a) ** n
    return TimeSeries(x, 1.0)


def analytic_cascade_h(a, q):
    """Exact generalized Hurst exponent of the binomial cascade."""
    if q == 0:
        raise QZero("h(q) of the cascade is evaluated for q != 0 only")
    if not (0.5 <= a < 1):
        raise InputError(f"cascade multiplier must lie in [0.5, 1), got {a}")
    return 1.0 / q - math.log(a**q + (1.0 - a) ** q) / (q * math.log(2.0))


def analytic_cascade_tau(a, q):
    """Mass exponent ``tau(q) = q h(q) - 1 = -log2(a**q + (1-a)**q)``."""
    return -math.log2(a**q + (1.0 - a) ** q)


def analytic_cascade_alpha(a, q):
    """Singularity strength ``tau'(q)`` of the cascade."""
    b = 1.0 - a
    return -(a**q * math.log(a) + b**q * math.log(b)) / ((a**q + b**q) * math.log(2.0))


def white_noise(n, seed) -> TimeSeries:
    if n < 1:
        raise InputError(f"length must be positive, got {n}")
    rng = np.random.default_rng(seed)
    return TimeSeries(rng.standard_normal(int(n)), 1.0)


def fgn_autocovariance(k, hurst):
    k = np.abs(np.asarray(k, dtype=np.float64))
    h2 = 2.0 * hurst
    return 0.5 * (np.abs(k + 1) ** h2 - 2 * k**h2 + np.abs(k - 1) ** h2)


def fgn(n, hurst, seed) -> TimeSeries:
    """Fractional Gaussian noise by circulant embedding (Davies-Harte).

    ``n`` must be a power of two. The embedding length starts at ``2n`` and
    is doubled once if negative eigenvalues appear.
    """
    n = int(n)
    if n < 1 or n & (n - 1):
        raise NonPowerOfTwo(f"fGn length must be a power of two, got {n}")
    if not (0 < hurst < 1):
        raise InputError(f"Hurst exponent must lie in (0, 1), got {hurst}")
    rng = np.random.default_rng(seed)

    for half in (n, 2 * n):
        m = 2 * half
        gamma = fgn_autocovariance(np.arange(half + 1), hurst)
        row = np.concatenate([gamma, gamma[-2:0:-1]])
        lam = np.fft.rfft(row).real
        if lam.min() >= -1e-10 * lam.max():
            break
    else:
        raise EmbeddingNotPSD(f"circulant embedding of fGn(H={hurst}) is not PSD")
    lam = np.clip(lam, 0.0, None)

    # Hermitian half-spectrum; endpoints are real
    z = rng.standard_normal(half + 1) + 1j * rng.standard_normal(half + 1)
    v = z * np.sqrt(lam / (2.0 * m))
    v[0] = rng.standard_normal() * math.sqrt(lam[0] / m)
    v[-1] = rng.standard_normal() * math.sqrt(lam[-1] / m)
    x = np.fft.irfft(np.conj(v), m) * m
    return TimeSeries(x[:n], 1.0)


def shuffle(x: TimeSeries, seed) -> TimeSeries:
    """Uniform random permutation of the samples (Fisher-Yates)."""
    rng = np.random.default_rng(seed)
    return x.with_samples(rng.permutation(x.samples))
