"""Analysis configuration shared by the estimators, the classifier and the CLI."""

from __future__ import annotations

import dataclasses
import json
from dataclasses import dataclass, field, fields

from .errors import InputError

METHODS = ("mfdfa", "wtmm", "both")


@dataclass(frozen=True)
class AnalysisConfig:
    """All tunables of the pipeline.

    A ``*_scale_max`` of 0 means "derive from the signal length" (``N/4`` for
    MFDFA, ``N/16`` for WTMM).
    """

    method: str = "both"
    # MFDFA
    detrend_order: int = 1
    bidirectional: bool = False
    mfdfa_scale_min: int = 16
    mfdfa_scale_max: int = 0
    mfdfa_n_scales: int = 20
    mfdfa_spacing: str = "log"
    mfdfa_q_min: float = -5.0
    mfdfa_q_max: float = 5.0
    mfdfa_q_step: float = 0.25
    # WTMM
    wavelet_order: int = 2
    half_width: float = 5.0
    wtmm_scale_min: int = 4
    wtmm_scale_max: int = 0
    wtmm_n_scales: int = 24
    wtmm_spacing: str = "log"
    wtmm_q_min: float = -2.0
    wtmm_q_max: float = 5.0
    wtmm_q_step: float = 0.25
    wtmm_boundary: str = "periodic"
    wtmm_engine: str = "fft"
    wtmm_integrate: bool = True
    wtmm_spectrum_q_min: float = 0.0
    # spectrum fit
    fit_min_f: float = 0.5
    fit_min_points: int = 5
    # classifier / run
    svm_c: float = 1.0
    seed: int = 0
    workers: int = 0
    output_dir: str = field(default=".", compare=False)

    def __post_init__(self):
        if self.method not in METHODS:
            raise InputError(f"method must be one of {METHODS}, got {self.method!r}")
        if not 0 <= self.detrend_order <= 3:
            raise InputError(f"detrend order must be 0..3, got {self.detrend_order}")
        if self.wavelet_order not in (1, 2, 3, 4):
            raise InputError(f"wavelet order must be 1..4, got {self.wavelet_order}")
        for name in ("mfdfa_spacing", "wtmm_spacing"):
            if getattr(self, name) not in ("log", "dyadic"):
                raise InputError(f"{name} must be 'log' or 'dyadic'")
        if self.wtmm_boundary not in ("periodic", "valid"):
            raise InputError("wtmm_boundary must be 'periodic' or 'valid'")
        if self.wtmm_engine not in ("fft", "direct"):
            raise InputError("wtmm_engine must be 'fft' or 'direct'")
        for lo, hi, step in (
            (self.mfdfa_q_min, self.mfdfa_q_max, self.mfdfa_q_step),
            (self.wtmm_q_min, self.wtmm_q_max, self.wtmm_q_step),
        ):
            if not (step > 0 and hi > lo):
                raise InputError(f"invalid q grid [{lo}, {hi}] step {step}")
        if self.half_width <= 0:
            raise InputError("half_width must be positive")
        if self.svm_c <= 0:
            raise InputError(f"SVM C must be positive, got {self.svm_c}")
        if self.mfdfa_n_scales < 4 or self.wtmm_n_scales < 4:
            raise InputError("at least 4 scales are needed for a regression")
        if self.workers < 0:
            raise InputError("workers must be >= 0")

    def replace(self, **changes) -> AnalysisConfig:
        return dataclasses.replace(self, **changes)

    def to_dict(self, include_output=False):
        d = dataclasses.asdict(self)
        if not include_output:
            d.pop("output_dir")
        return d

    @classmethod
    def from_mapping(cls, mapping, base=None) -> AnalysisConfig:
        """Build from string or typed values, coercing to the field types."""
        base = base or cls()
        types = {f.name: f.type for f in fields(cls)}
        changes = {}
        for key, raw in mapping.items():
            key = key.strip().replace("-", "_")
            if key not in types:
                raise InputError(f"unknown config key {key!r}")
            changes[key] = _coerce(raw, types[key], key)
        return dataclasses.replace(base, **changes)


def _coerce(raw, type_name, key):
    if not isinstance(raw, str):
        if type_name == "float" and isinstance(raw, (int, float)):
            return float(raw)
        return raw
    text = raw.strip()
    try:
        if type_name == "bool":
            low = text.lower()
            if low in ("1", "true", "yes", "on"):
                return True
            if low in ("0", "false", "no", "off"):
                return False
            raise ValueError(text)
        if type_name == "int":
            return int(text)
        if type_name == "float":
            return float(text)
    except ValueError:
        raise InputError(f"bad value {raw!r} for config key {key!r}") from None
    return text


def load_config_file(path, base=None) -> AnalysisConfig:
    """Read ``key = value`` lines (``#`` comments allowed) or a JSON object."""
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise InputError(f"cannot read config file {path}: {exc}") from exc
    if text.lstrip().startswith("{"):
        try:
            mapping = json.loads(text)
        except json.JSONDecodeError as exc:
            raise InputError(f"bad JSON config {path}: {exc}") from exc
    else:
        mapping = {}
        for lineno, line in enumerate(text.splitlines(), 1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise InputError(f"{path}:{lineno}: expected key = value")
            key, value = line.split("=", 1)
            mapping[key.strip()] = value.strip()
    return AnalysisConfig.from_mapping(mapping, base)
