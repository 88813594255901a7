"""Multifractal speech analysis: MFDFA and WTMM singularity spectra, the
(S, alpha1, alpha2) feature space and a one-vs-one linear SVM."""

from .audio_io import EmotionLabel, TimeSeries, decode_wav, normalize_peak, read_wav
from .config import AnalysisConfig
from .kernels import BACKEND
from .mfdfa import mfdfa_analyze
from .wtmm import wtmm_analyze

__version__ = "0.1.0"

__all__ = [
    "AnalysisConfig",
    "BACKEND",
    "EmotionLabel",
    "TimeSeries",
    "decode_wav",
    "mfdfa_analyze",
    "normalize_peak",
    "read_wav",
    "wtmm_analyze",
]
