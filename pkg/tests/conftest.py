import struct

import numpy as np
import pytest

from mfspeech import kernels


@pytest.fixture(params=kernels.available_backends())
def backend(request, monkeypatch):
    """Run a test once per available kernel backend."""
    monkeypatch.setattr(kernels, "_impl", kernels.get_backend(request.param))
    yield request.param


def riff(chunks):
    """Assemble a RIFF/WAVE file from ``(id, body)`` pairs, padding odd bodies."""
    out = b""
    for cid, body in chunks:
        out += cid + struct.pack("<I", len(body)) + body
        if len(body) % 2:
            out += b"\0"
    return b"RIFF" + struct.pack("<I", 4 + len(out)) + b"WAVE" + out


def fmt_chunk(tag, channels, rate, bits):
    align = channels * bits // 8
    return struct.pack("<HHIIHH", tag, channels, rate, rate * align, align, bits)


def pcm16(values, rate=16000, channels=1):
    data = struct.pack(f"<{len(values)}h", *values)
    return riff([(b"fmt ", fmt_chunk(1, channels, rate, 16)), (b"data", data)])


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def three_clusters(seed=0, n=50, sigma=0.1):
    """Gaussian clusters at (0,0,0), (1,0,0), (0,1,0), one per emotion."""
    from mfspeech.audio_io import EmotionLabel
    from mfspeech.features import FeatureVector

    g = np.random.default_rng(seed)
    centres = np.array([[0.0, 0, 0], [1.0, 0, 0], [0.0, 1, 0]])
    rows = []
    for lab, c in zip(EmotionLabel, centres):
        for k, v in enumerate(c + sigma * g.standard_normal((n, 3))):
            rows.append(FeatureVector(*v, label=lab, path=f"{lab.value}/{k:03d}.wav"))
    return rows


_ACCEPTANCE = []


@pytest.fixture
def criterion(request):
    """Record one PASS/FAIL line for an acceptance criterion.

    Call ``criterion(label, ok, detail)``; the line is printed immediately and
    again in the terminal summary, and the test fails if ``ok`` is false.
    """

    def record(label, ok, detail=""):
        line = f"[{'PASS' if ok else 'FAIL'}] criterion {label}: {detail}"
        _ACCEPTANCE.append(line)
        print(line)
        return ok

    return record


def pytest_terminal_summary(terminalreporter):
    if _ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for line in _ACCEPTANCE:
            terminalreporter.write_line(line)
