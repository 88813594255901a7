"""Singularity-spectrum mathematics shared by both estimators.

tau(q) -> Legendre transform -> (alpha, f(alpha)) -> quadratic fit around the
apex -> width and zeros, plus the area ``S`` of the low-alpha branch.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import CollinearPoints, DegenerateSpectrum, NoRealRoots, UpwardParabola


@dataclass(frozen=True, eq=False)
class HurstSpectrum:
    """Generalized Hurst exponents h(q) with the r^2 of each log-log fit."""

    qs: np.ndarray
    h: np.ndarray
    r2: np.ndarray


@dataclass(frozen=True, eq=False)
class ScalingExponents:
    qs: np.ndarray
    tau: np.ndarray
    r2: np.ndarray | None = None


@dataclass(frozen=True, eq=False)
class SingularitySpectrum:
    """Legendre pairs for every q; ``pruned`` marks points dropped for
    breaking the strictly decreasing alpha order."""

    qs: np.ndarray
    tau: np.ndarray
    alpha: np.ndarray
    f: np.ndarray
    pruned: np.ndarray
    source: str | None = None

    @property
    def kept(self):
        return ~self.pruned

    @property
    def points(self):
        k = self.kept
        return self.alpha[k], self.f[k]

    @property
    def n_pruned(self):
        return int(self.pruned.sum())


@dataclass(frozen=True)
class SpectrumFit:
    """Downward parabola ``f = A (alpha - alpha0)**2 + C`` fitted near the apex.

    ``alpha0``/``C`` are the vertex of the fitted quadratic. ``B`` is the
    linear coefficient of the same quadratic written around ``alpha_peak``
    (the alpha of the largest raw f); it is zero when the fitted vertex sits
    on the data apex and measures the spectrum's lopsidedness otherwise.
    ``alpha1 < alpha2`` are the zeros; NaN when the parabola stays below 0.
    """

    A: float
    B: float
    C: float
    alpha0: float
    alpha_peak: float
    alpha1: float
    alpha2: float
    width: float
    residual_rms: float
    n_points_fit: int

    @property
    def has_roots(self):
        return bool(np.isfinite(self.width))

    def __call__(self, alpha):
        return self.A * (np.asarray(alpha) - self.alpha0) ** 2 + self.C

    def to_dict(self):
        return {
            "A": self.A,
            "B": self.B,
            "C": self.C,
            "alpha0": self.alpha0,
            "alpha_peak": self.alpha_peak,
            "alpha1": self.alpha1 if self.has_roots else None,
            "alpha2": self.alpha2 if self.has_roots else None,
            "width": self.width if self.has_roots else None,
            "residual_rms": self.residual_rms,
            "n_points_fit": self.n_points_fit,
        }


@dataclass(eq=False)
class MultifractalResult:
    """Everything one estimator produced for one signal."""

    method: str
    qs: np.ndarray
    scales: np.ndarray
    surface: np.ndarray  # F_q(s) for MFDFA, Z(q, s) for WTMM; shape (q, s)
    tau: ScalingExponents
    spectrum: SingularitySpectrum
    fit: SpectrumFit
    hurst: HurstSpectrum | None = None
    metadata: dict = field(default_factory=dict)


def loglog_slopes(scales, log_values):
    """Least-squares slope of each row of ``log_values`` against ``ln(scales)``.

    Returns ``(slopes, intercepts, r2)``.
    """
    x = np.log(np.asarray(scales, dtype=np.float64))
    y = np.atleast_2d(np.asarray(log_values, dtype=np.float64))
    xc = x - x.mean()
    sxx = xc @ xc
    ym = y.mean(axis=1)
    yc = y - ym[:, None]
    slopes = (yc @ xc) / sxx
    intercepts = ym - slopes * x.mean()
    ss_tot = np.einsum("ij,ij->i", yc, yc)
    resid = yc - slopes[:, None] * xc[None, :]
    ss_res = np.einsum("ij,ij->i", resid, resid)
    with np.errstate(invalid="ignore", divide="ignore"):
        r2 = np.where(ss_tot > 0, 1.0 - ss_res / ss_tot, 1.0)
    return slopes, intercepts, r2


def tau_from_h(h: HurstSpectrum) -> ScalingExponents:
    qs = np.asarray(h.qs, dtype=np.float64)
    return ScalingExponents(qs, qs * np.asarray(h.h) - 1.0, h.r2)


def _decreasing_subsequence(alpha, tol):
    """Mask of the longest subsequence with alpha strictly decreasing by > tol.

    Ties in length resolve toward earlier indices so the result is
    deterministic.
    """
    n = alpha.size
    best = np.ones(n, dtype=np.int64)
    prev = np.full(n, -1, dtype=np.int64)
    for i in range(n):
        for j in range(i):
            if alpha[j] > alpha[i] + tol and best[j] + 1 > best[i]:
                best[i] = best[j] + 1
                prev[i] = j
    keep = np.zeros(n, dtype=bool)
    i = int(np.argmax(best))
    while i >= 0:
        keep[i] = True
        i = prev[i]
    return keep


def legendre(tau: ScalingExponents, source=None) -> SingularitySpectrum:
    """Legendre transform of sampled tau(q).

    alpha is the central difference of tau (one-sided at the ends) and
    ``f = q*alpha - tau``. Points that break the strictly decreasing order of
    alpha are flagged as pruned.
    """
    qs = np.asarray(tau.qs, dtype=np.float64)
    t = np.asarray(tau.tau, dtype=np.float64)
    if qs.size < 3:
        raise DegenerateSpectrum("the Legendre transform needs at least 3 q values")
    alpha = np.empty_like(t)
    alpha[1:-1] = (t[2:] - t[:-2]) / (qs[2:] - qs[:-2])
    alpha[0] = (t[1] - t[0]) / (qs[1] - qs[0])
    alpha[-1] = (t[-1] - t[-2]) / (qs[-1] - qs[-2])
    f = qs * alpha - t

    tol = 1e-9 * max(1.0, float(np.max(np.abs(alpha))))
    keep = _decreasing_subsequence(alpha, tol)
    if keep.sum() < 3:
        raise DegenerateSpectrum(
            f"only {int(keep.sum())} spectrum point(s) survive pruning; monofractal collapse"
        )
    return SingularitySpectrum(qs, t, alpha, f, ~keep, source)


def _fit_points(spec, min_f, min_points):
    a, f = spec.points
    sel = f >= min_f
    if sel.sum() < min_points:
        sel = np.ones_like(sel)
    return a, f, a[sel], f[sel]


def quadratic_fit(spec: SingularitySpectrum, min_f=0.5, min_points=5) -> SpectrumFit:
    """Least-squares parabola through the spectrum points near its apex.

    Points with ``f >= min_f`` are used; if fewer than ``min_points`` qualify
    all surviving points are used instead.
    """
    a_all, f_all, a, f = _fit_points(spec, min_f, min_points)
    if a.size < 3 or np.unique(a).size < 3:
        raise CollinearPoints("need at least 3 distinct alpha values for a quadratic fit")
    alpha_peak = float(a_all[np.argmax(f_all)])
    u = a - alpha_peak
    span = float(np.ptp(a))
    scale = span if span > 0 else 1.0
    un = u / scale
    design = np.column_stack([un * un, un, np.ones_like(un)])
    coef, *_ = np.linalg.lstsq(design, f, rcond=None)
    A = coef[0] / scale**2
    B = coef[1] / scale
    c_peak = coef[2]

    magnitude = np.max(np.abs(f)) + abs(coef[1])
    if abs(coef[0]) <= 1e-9 * max(magnitude, 1e-300):
        raise CollinearPoints("spectrum points are collinear")
    if A >= 0:
        raise UpwardParabola(f"fitted parabola opens upward (A = {A:.6g})")

    alpha0 = alpha_peak - B / (2.0 * A)
    C = c_peak - B * B / (4.0 * A)
    resid = f - (A * u * u + B * u + c_peak)
    rms = float(np.sqrt(np.mean(resid * resid)))
    fit = SpectrumFit(
        A=float(A), B=float(B), C=float(C), alpha0=float(alpha0),
        alpha_peak=alpha_peak, alpha1=np.nan, alpha2=np.nan, width=np.nan,
        residual_rms=rms, n_points_fit=int(a.size),
    )
    try:
        w, r1, r2 = spectrum_width(fit)
    except NoRealRoots:
        return fit
    return SpectrumFit(**{**fit.__dict__, "alpha1": r1, "alpha2": r2, "width": w})


def spectrum_width(fit: SpectrumFit):
    """Zeros of the fitted parabola: returns ``(width, alpha1, alpha2)``."""
    if not fit.A < 0:
        raise UpwardParabola(f"width needs A < 0, got {fit.A}")
    if not fit.C > 0:
        raise NoRealRoots(f"parabola apex f = {fit.C:.6g} never reaches zero from above")
    half = float(np.sqrt(-fit.C / fit.A))
    a1 = fit.alpha0 - half
    a2 = fit.alpha0 + half
    return a2 - a1, a1, a2


def low_fluct_area(spec: SingularitySpectrum) -> float:
    """Trapezoidal area under the raw spectrum from the smallest alpha up to
    the alpha of maximum f."""
    a, f = spec.points
    order = np.argsort(a, kind="stable")
    a, f = a[order], f[order]
    top = int(np.argmax(f))
    if top < 1:
        raise DegenerateSpectrum("low-alpha branch has fewer than 2 points")
    a, f = a[: top + 1], f[: top + 1]
    return float(np.sum(0.5 * (f[1:] + f[:-1]) * np.diff(a)))
