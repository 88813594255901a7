"""WAV decoding and corpus label parsing.

Two corpus naming conventions are understood:

* Berlin EMO-DB: ``03a01Fa.wav`` = speaker ``03``, text ``a01``, emotion
  letter ``F`` (German initial), version letter ``a``.
* TESS: ``OAF_back_happy.wav`` = speaker group, target word, emotion token.

Only Happiness, Neutral and Sadness are in scope; other emotions parse to
``None`` and are skipped by :func:`scan_corpus`.
"""

from __future__ import annotations

import enum
import os
import re
import struct
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import (
    AllZeroSignal,
    CorpusIOError,
    EmptyData,
    InvalidSignal,
    MalformedContainer,
    MalformedName,
    UnsupportedEncoding,
)


@dataclass(frozen=True, eq=False)
class TimeSeries:
    """Uniformly sampled real signal.

    Parameters
    ----------
    samples : array_like
        Finite real amplitudes, at least one.
    sample_rate : float
        Samples per second; must be positive.
    """

    samples: np.ndarray
    sample_rate: float = 1.0

    def __post_init__(self):
        x = np.array(self.samples, dtype=np.float64).ravel()
        if x.size < 1:
            raise InvalidSignal("time series needs at least one sample")
        if not np.all(np.isfinite(x)):
            raise InvalidSignal("time series contains non-finite samples")
        if not (np.isfinite(self.sample_rate) and self.sample_rate > 0):
            raise InvalidSignal(f"sample rate must be positive, got {self.sample_rate}")
        x.setflags(write=False)
        object.__setattr__(self, "samples", x)

    def __len__(self):
        return self.samples.size

    def with_samples(self, samples):
        return TimeSeries(samples, self.sample_rate)


class EmotionLabel(enum.Enum):
    """The three in-scope emotions, in confusion-matrix order."""

    HAPPINESS = "happiness"
    NEUTRAL = "neutral"
    SADNESS = "sadness"

    @property
    def index(self):
        return _LABEL_ORDER.index(self)

    @classmethod
    def parse(cls, text):
        key = str(text).strip().lower()
        for label in cls:
            if key in (label.value, label.name.lower()):
                return label
        raise ValueError(f"unknown emotion label {text!r}")

    def __lt__(self, other):
        if not isinstance(other, EmotionLabel):
            return NotImplemented
        return self.index < other.index


_LABEL_ORDER = list(EmotionLabel)


class Corpus(enum.Enum):
    BERLIN = "berlin"
    TESS = "tess"


@dataclass(frozen=True)
class CorpusEntry:
    path: Path
    label: EmotionLabel
    corpus: Corpus


# ---------------------------------------------------------------------------
# WAV

_FORMAT_PCM = 0x0001
_FORMAT_FLOAT = 0x0003
_FORMAT_EXTENSIBLE = 0xFFFE


def _iter_chunks(data):
    pos = 12
    while pos + 8 <= len(data):
        cid, size = struct.unpack_from("<4sI", data, pos)
        body = data[pos + 8 : pos + 8 + size]
        yield cid, body
        pos += 8 + size + (size & 1)


def decode_wav(data: bytes) -> TimeSeries:
    """Decode a RIFF/WAVE byte string into a mono :class:`TimeSeries`.

    Integer PCM (8/16/24/32-bit) is scaled by its full-scale value so that
    the most negative code maps to -1. IEEE float (32/64-bit) is taken as
    is. Channels are mixed down by their arithmetic mean.
    """
    if len(data) < 12 or data[:4] != b"RIFF" or data[8:12] != b"WAVE":
        raise MalformedContainer("not a RIFF/WAVE container")

    fmt = None
    payload = None
    for cid, body in _iter_chunks(data):
        if cid == b"fmt " and fmt is None:
            fmt = body
        elif cid == b"data" and payload is None:
            payload = body
    if fmt is None:
        raise MalformedContainer("missing 'fmt ' chunk")
    if payload is None:
        raise MalformedContainer("missing 'data' chunk")
    if len(fmt) < 16:
        raise MalformedContainer("truncated 'fmt ' chunk")

    tag, channels, rate, _, block_align, bits = struct.unpack_from("<HHIIHH", fmt)
    if tag == _FORMAT_EXTENSIBLE:
        if len(fmt) < 40:
            raise MalformedContainer("truncated WAVE_FORMAT_EXTENSIBLE header")
        # first two bytes of the subformat GUID carry the actual format tag
        tag = struct.unpack_from("<H", fmt, 24)[0]
    if channels < 1 or rate < 1:
        raise MalformedContainer(f"invalid header: {channels} channels at {rate} Hz")

    width = bits // 8
    if tag == _FORMAT_PCM and bits in (8, 16, 24, 32):
        pass
    elif tag == _FORMAT_FLOAT and bits in (32, 64):
        pass
    else:
        raise UnsupportedEncoding(f"format tag 0x{tag:04x} with {bits} bits per sample")

    frame = width * channels
    if block_align and block_align != frame:
        raise MalformedContainer(f"block align {block_align} does not match {frame}")
    n_frames = len(payload) // frame
    if n_frames == 0:
        raise EmptyData("WAV data chunk holds no samples")
    raw = payload[: n_frames * frame]

    if tag == _FORMAT_FLOAT:
        x = np.frombuffer(raw, dtype="<f4" if bits == 32 else "<f8").astype(np.float64)
    elif bits == 8:
        x = (np.frombuffer(raw, dtype=np.uint8).astype(np.float64) - 128.0) / 128.0
    elif bits == 16:
        x = np.frombuffer(raw, dtype="<i2").astype(np.float64) / 32768.0
    elif bits == 24:
        b = np.frombuffer(raw, dtype=np.uint8).reshape(-1, 3).astype(np.int32)
        v = b[:, 0] | (b[:, 1] << 8) | (b[:, 2] << 16)
        v = np.where(v >= 1 << 23, v - (1 << 24), v)
        x = v.astype(np.float64) / float(1 << 23)
    else:
        x = np.frombuffer(raw, dtype="<i4").astype(np.float64) / float(1 << 31)

    x = x.reshape(n_frames, channels).mean(axis=1)
    return TimeSeries(x, float(rate))


def read_wav(path) -> TimeSeries:
    with open(path, "rb") as fh:
        return decode_wav(fh.read())


def encode_wav_float32(x: TimeSeries, sample_rate=None) -> bytes:
    """Serialize ``x`` as mono 32-bit IEEE-float WAV."""
    rate = int(round(sample_rate if sample_rate is not None else x.sample_rate))
    body = np.asarray(x.samples, dtype="<f4").tobytes()
    fmt = struct.pack("<HHIIHH", _FORMAT_FLOAT, 1, rate, rate * 4, 4, 32)
    chunks = b"fmt " + struct.pack("<I", len(fmt)) + fmt
    chunks += b"data" + struct.pack("<I", len(body)) + body
    return b"RIFF" + struct.pack("<I", 4 + len(chunks)) + b"WAVE" + chunks


def normalize_peak(x: TimeSeries) -> TimeSeries:
    peak = np.max(np.abs(x.samples))
    if peak == 0:
        raise AllZeroSignal("cannot peak-normalize an all-zero signal")
    return x.with_samples(x.samples / peak)


# ---------------------------------------------------------------------------
# labels

_BERLIN_RE = re.compile(r"^(\d{2})([a-z]\d{2})([A-Z])([a-z])(?:\.wav)?$", re.IGNORECASE)
# W=Aerger, L=Langeweile, E=Ekel, A=Angst, F=Freude, T=Trauer, N=neutral
_BERLIN_LETTERS = {
    "F": EmotionLabel.HAPPINESS,
    "N": EmotionLabel.NEUTRAL,
    "T": EmotionLabel.SADNESS,
    "W": None,
    "L": None,
    "E": None,
    "A": None,
}

_TESS_TOKENS = {
    "happy": EmotionLabel.HAPPINESS,
    "neutral": EmotionLabel.NEUTRAL,
    "sad": EmotionLabel.SADNESS,
}


def parse_label_berlin(filename):
    """Emotion of a Berlin EMO-DB clip, or ``None`` when out of scope."""
    name = os.path.basename(str(filename))
    m = _BERLIN_RE.match(name)
    if m is None:
        raise MalformedName(f"not a Berlin EMO-DB file name: {name!r}")
    letter = m.group(3).upper()
    if letter not in _BERLIN_LETTERS:
        raise MalformedName(f"unknown Berlin emotion letter {letter!r} in {name!r}")
    return _BERLIN_LETTERS[letter]


def parse_label_tess(path):
    """Emotion of a TESS clip (last ``_`` token of the stem), or ``None``."""
    name = os.path.basename(str(path))
    stem, ext = os.path.splitext(name)
    parts = stem.split("_")
    if ext.lower() != ".wav" or len(parts) < 3 or not all(parts):
        raise MalformedName(f"not a TESS file name: {name!r}")
    return _TESS_TOKENS.get(parts[-1].lower())


_PARSERS = {Corpus.BERLIN: parse_label_berlin, Corpus.TESS: parse_label_tess}


def detect_corpus(path):
    """Guess which naming convention a file name follows, ``None`` if neither."""
    name = os.path.basename(str(path))
    if _BERLIN_RE.match(name):
        return Corpus.BERLIN
    try:
        parse_label_tess(name)
    except MalformedName:
        return None
    return Corpus.TESS


def scan_corpus(root, convention) -> list[CorpusEntry]:
    """Recursively collect in-scope WAV files under ``root``.

    Files whose names do not follow the convention, or whose emotion is out
    of scope, are skipped. Entries are sorted by path.
    """
    convention = Corpus(convention) if not isinstance(convention, Corpus) else convention
    root = Path(root)
    if not root.is_dir():
        raise CorpusIOError(f"corpus root {str(root)!r} is not a directory")
    parse = _PARSERS[convention]
    entries = []
    for dirpath, _, files in os.walk(root):
        for fname in files:
            if not fname.lower().endswith(".wav"):
                continue
            try:
                label = parse(fname)
            except MalformedName:
                continue
            if label is None:
                continue
            path = Path(dirpath) / fname
            if not os.access(path, os.R_OK):
                continue
            entries.append(CorpusEntry(path, label, convention))
    entries.sort(key=lambda e: e.path.as_posix())
    return entries
