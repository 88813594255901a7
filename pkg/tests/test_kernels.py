"""The compiled and NumPy kernels must agree."""

import os
import subprocess
import sys

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from mfspeech import kernels
from mfspeech.mfdfa import detrend_basis
from mfspeech.wtmm import gaussian_derivative_wavelet

BACKENDS = kernels.available_backends()
needs_both = pytest.mark.skipif(len(BACKENDS) < 2, reason="compiled kernels not built")
py = kernels.get_backend("python")


def test_python_always_available():
    assert "python" in BACKENDS
    assert kernels.BACKEND in BACKENDS


def test_unknown_backend():
    with pytest.raises(ValueError):
        kernels.get_backend("fortran")


@pytest.mark.parametrize("name", ["python", "cython"])
def test_env_selection(name):
    if name not in BACKENDS:
        pytest.skip("compiled kernels not built")
    env = dict(os.environ, MFSPEECH_BACKEND=name)
    out = subprocess.run(
        [sys.executable, "-c", "import mfspeech; print(mfspeech.BACKEND)"],
        env=env, capture_output=True, text=True, check=True,
    )
    assert out.stdout.strip() == name


def test_env_rejects_unknown():
    env = dict(os.environ, MFSPEECH_BACKEND="bogus")
    out = subprocess.run([sys.executable, "-c", "import mfspeech"], env=env, capture_output=True)
    assert out.returncode != 0


@needs_both
class TestAgreement:
    c = kernels.get_backend("cython") if "cython" in BACKENDS else None

    @settings(max_examples=60, deadline=None)
    @given(st.integers(4, 200), st.integers(0, 3), st.booleans(), st.integers(0, 2**31))
    def test_segment_f2(self, s, order, from_end, seed):
        if s < order + 2:
            return
        y = np.cumsum(np.random.default_rng(seed).standard_normal(3 * s + 7))
        b = detrend_basis(s, order)
        a = self.c.segment_f2(y, s, b, from_end)
        ref = py.segment_f2(y, s, b, from_end)
        np.testing.assert_allclose(a, ref, rtol=1e-9, atol=1e-13 * np.max(y * y))

    @settings(max_examples=60, deadline=None)
    @given(
        arrays(np.float64, st.integers(1, 300), elements=st.floats(-1e3, 1e3)),
        st.integers(1, 41), st.booleans(), st.sampled_from(["random", "even", "odd"]),
    )
    def test_correlate(self, x, m, periodic, kind):
        if periodic and m > x.size:
            return
        k = np.random.default_rng(m).standard_normal(m)
        if kind == "even":
            k = k + k[::-1]
        elif kind == "odd":
            k = k - k[::-1]
        a = self.c.correlate(x, k, periodic)
        ref = py.correlate(x, k, periodic)
        assert a.shape == ref.shape
        scale = np.sum(np.abs(k)) * max(np.max(np.abs(x)), 1.0)
        np.testing.assert_allclose(a, ref, rtol=0, atol=1e-12 * scale)

    def test_correlate_wavelets(self, rng):
        x = rng.standard_normal(5000)
        for m in (1, 2, 3, 4):
            for s in (1, 3, 8, 40):
                k = gaussian_derivative_wavelet(m, s)
                for per in (True, False):
                    np.testing.assert_allclose(
                        self.c.correlate(x, k, per), py.correlate(x, k, per), rtol=1e-10, atol=1e-12
                    )

    @settings(max_examples=100, deadline=None)
    @given(arrays(np.float64, st.integers(0, 60), elements=st.sampled_from([0.0, 1.0, 2.0, 2.5, 3.0])), st.floats(0, 3))
    def test_local_maxima(self, a, floor):
        np.testing.assert_array_equal(self.c.local_maxima(a, floor), py.local_maxima(a, floor))

    def test_periodic_kernel_too_long(self):
        for mod in (self.c, py):
            with pytest.raises(ValueError):
                mod.correlate(np.ones(3), np.ones(5), True)
            assert mod.correlate(np.ones(3), np.ones(5), False).size == 0
