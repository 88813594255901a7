"""The (S, alpha1, alpha2) feature space and its CSV file format."""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass

import numpy as np

from .audio_io import EmotionLabel, TimeSeries
from .config import AnalysisConfig
from .errors import InputError
from .mfdfa import mfdfa_analyze
from .spectrum import low_fluct_area, spectrum_width
from .wtmm import wtmm_analyze

FEATURE_NAMES = ("S", "alpha1", "alpha2")
FEATURES_HEADER = ("path", "label") + FEATURE_NAMES
FEATURES_SCHEMA = "# mfspeech-features v1"


@dataclass(frozen=True)
class FeatureVector:
    """Low-alpha MFDFA area ``S`` and the WTMM parabola zeros."""

    S: float
    alpha1: float
    alpha2: float
    label: EmotionLabel | None = None
    path: str | None = None

    def as_array(self):
        return np.array([self.S, self.alpha1, self.alpha2], dtype=np.float64)

    @property
    def is_finite(self):
        return all(math.isfinite(v) for v in (self.S, self.alpha1, self.alpha2))


def extract_features(x: TimeSeries, cfg: AnalysisConfig | None = None, *, label=None, path=None) -> FeatureVector:
    """Run both estimators on one clip; any estimator error aborts the clip."""
    cfg = cfg or AnalysisConfig()
    mf = mfdfa_analyze(x, cfg)
    wt = wtmm_analyze(x, cfg)
    area = low_fluct_area(mf.spectrum)
    _, a1, a2 = spectrum_width(wt.fit)
    return FeatureVector(area, a1, a2, label, path)


def write_features_csv(rows, fh=None):
    """Write feature rows sorted by path; returns the text when ``fh`` is None."""
    out = fh if fh is not None else io.StringIO()
    out.write(FEATURES_SCHEMA + "\n")
    w = csv.writer(out, lineterminator="\n")
    w.writerow(FEATURES_HEADER)
    for fv in sorted(rows, key=lambda r: r.path or ""):
        w.writerow([
            fv.path or "",
            fv.label.value if fv.label is not None else "",
            repr(float(fv.S)),
            repr(float(fv.alpha1)),
            repr(float(fv.alpha2)),
        ])
    if fh is None:
        return out.getvalue()
    return None


def read_features_csv(fh) -> list[FeatureVector]:
    lines = [ln for ln in fh if ln.strip() and not ln.lstrip().startswith("#")]
    reader = csv.reader(lines)
    try:
        header = next(reader)
    except StopIteration:
        raise InputError("feature file is empty") from None
    if tuple(h.strip() for h in header) != FEATURES_HEADER:
        raise InputError(f"feature file header must be {','.join(FEATURES_HEADER)}")
    rows = []
    for lineno, rec in enumerate(reader, 2):
        if len(rec) != len(FEATURES_HEADER):
            raise InputError(f"feature row {lineno}: expected {len(FEATURES_HEADER)} fields")
        path, label, *vals = rec
        try:
            lab = EmotionLabel.parse(label) if label.strip() else None
            S, a1, a2 = (float(v) for v in vals)
        except ValueError as exc:
            raise InputError(f"feature row {lineno}: {exc}") from None
        rows.append(FeatureVector(S, a1, a2, lab, path))
    return rows


def load_features(path) -> list[FeatureVector]:
    try:
        with open(path, encoding="utf-8", newline="") as fh:
            return read_features_csv(fh)
    except OSError as exc:
        raise InputError(f"cannot read feature file {path}: {exc}") from exc
