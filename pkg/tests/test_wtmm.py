import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from mfspeech.config import AnalysisConfig
from mfspeech.errors import NoMaximaAtScale, SignalTooShortForScale, UnsupportedOrder
from mfspeech.grids import q_grid
from mfspeech.spectrum import ScalingExponents
from mfspeech.synth import CascadeSpec, analytic_cascade_tau, binomial_cascade, white_noise
from mfspeech.wtmm import (
    PartitionFunction,
    WaveletField,
    cwt,
    gaussian_derivative_wavelet,
    modulus_maxima,
    partition_function,
    wtmm_analyze,
    wtmm_scaling_exponents,
)


def _field(row):
    return WaveletField(np.array([1]), [np.asarray(row, dtype=float)], [0], 2, "periodic", len(row))


def brute_cwt(x, s, m, periodic):
    """Direct double loop over the kernel support."""
    k = gaussian_derivative_wavelet(m, s)
    half = k.size // 2
    n = len(x)
    pos = range(n) if periodic else range(half, n - half)
    out = []
    for c in pos:
        acc = 0.0
        for j in range(k.size):
            idx = c + j - half
            acc += x[idx % n] * k[j]
        out.append(acc / s)
    return np.array(out)


class TestWavelet:
    def test_mexican_hat_centre(self):
        k = gaussian_derivative_wavelet(2, 4, admissible=False)
        assert k[k.size // 2] == -1.0
        np.testing.assert_allclose(k, (np.linspace(-5, 5, 41) ** 2 - 1) * np.exp(-np.linspace(-5, 5, 41) ** 2 / 2), atol=1e-15)

    @pytest.mark.parametrize("s", [1, 3, 10, 37])
    def test_parity(self, s):
        for m in (1, 2, 3, 4):
            k = gaussian_derivative_wavelet(m, s)
            sign = -1 if m % 2 else 1
            np.testing.assert_array_equal(k[::-1], sign * k)

    @pytest.mark.parametrize("s", [2, 5, 16, 64])
    def test_zero_mean(self, s):
        k = gaussian_derivative_wavelet(2, s)
        assert abs(k.sum()) < 1e-6 * np.abs(k).sum()

    @pytest.mark.parametrize("m", [1, 2, 3, 4])
    def test_vanishing_moments(self, m):
        k = gaussian_derivative_wavelet(m, 8)
        t = np.arange(k.size) - k.size // 2
        for p in range(m):
            assert abs(np.sum(t**p * k)) < 1e-9 * np.sum(np.abs(t**p * k))

    def test_correction_is_small(self):
        raw = gaussian_derivative_wavelet(2, 16, admissible=False)
        adj = gaussian_derivative_wavelet(2, 16)
        assert np.max(np.abs(raw - adj)) < 1e-4

    @pytest.mark.parametrize("m", [0, 5])
    def test_order(self, m):
        with pytest.raises(UnsupportedOrder):
            gaussian_derivative_wavelet(m, 4)


class TestCwt:
    @pytest.mark.parametrize("boundary", ["periodic", "valid"])
    @pytest.mark.parametrize("m", [1, 2, 4])
    def test_against_brute_force(self, boundary, m, rng, backend):
        x = rng.standard_normal(200)
        f = cwt(x, [2, 5, 9], m, boundary=boundary, engine="direct")
        g = cwt(x, [2, 5, 9], m, boundary=boundary, engine="fft")
        for j, s in enumerate([2, 5, 9]):
            ref = brute_cwt(x, s, m, boundary == "periodic")
            np.testing.assert_allclose(f.rows[j], ref, atol=1e-12)
            np.testing.assert_allclose(g.rows[j], ref, atol=1e-10)

    def test_engines_agree_large(self, rng, backend):
        x = np.cumsum(rng.standard_normal(4096))
        scales = [4, 11, 30, 80]
        for boundary in ("periodic", "valid"):
            a = cwt(x, scales, boundary=boundary, engine="fft")
            b = cwt(x, scales, boundary=boundary, engine="direct")
            for ra, rb in zip(a.rows, b.rows):
                np.testing.assert_allclose(ra, rb, atol=1e-8 * np.max(np.abs(x)))

    def test_valid_offsets(self, rng):
        x = rng.standard_normal(300)
        f = cwt(x, [4, 8], boundary="valid")
        assert f.offsets == [20, 40]
        assert [r.size for r in f.rows] == [260, 220]

    def test_constant_and_ramp(self):
        c = np.full(1000, 3.0)
        ramp = np.linspace(-2.0, 5.0, 1000)
        for x in (c, ramp):
            for m in (2, 3):
                f = cwt(x, [4, 16], m, boundary="valid")
                assert max(np.max(np.abs(r)) for r in f.rows) < 1e-6 * np.max(np.abs(x))
        f = cwt(c, [4, 16], 1, boundary="periodic")
        assert max(np.max(np.abs(r)) for r in f.rows) < 1e-6 * 3.0

    def test_quadratic_killed_by_m3(self):
        t = np.linspace(-1, 1, 800)
        f = cwt(1 + t + 4 * t**2, [3, 9], 3, boundary="valid")
        assert max(np.max(np.abs(r)) for r in f.rows) < 1e-6 * 6

    def test_linear(self, rng):
        x = rng.standard_normal(512)
        a = cwt(x, [3, 7], engine="direct")
        b = cwt(2 * x, [3, 7], engine="direct")
        for ra, rb in zip(a.rows, b.rows):
            np.testing.assert_array_equal(rb, 2 * ra)

    def test_too_short(self):
        with pytest.raises(SignalTooShortForScale) as err:
            cwt(np.ones(50), [2, 8])
        assert err.value.scale == 8


class TestMaxima:
    def test_plateau(self, backend):
        assert modulus_maxima(_field([1, 3, 2, 2, 5, 1]), 1).tolist() == [1, 4]

    def test_boundary(self, backend):
        assert modulus_maxima(_field([5, 1, 1]), 1).tolist() == []

    def test_monotone(self, backend):
        assert modulus_maxima(_field(np.arange(10.0)), 1).tolist() == []

    def test_plateau_rising_then_flat(self, backend):
        # strict on the left, non-strict on the right
        assert modulus_maxima(_field([0, 2, 2, 1]), 1).tolist() == [1]

    def test_uses_modulus(self, backend):
        assert modulus_maxima(_field([0, -4, 1, 3, 0]), 1).tolist() == [1, 3]

    def test_offsets(self):
        f = WaveletField(np.array([1]), [np.array([0.0, 1.0, 0.0])], [10], 2, "valid", 13)
        assert modulus_maxima(f, 1).tolist() == [11]

    def test_rescaling_invariant(self, rng):
        x = rng.standard_normal(1024)
        a = cwt(x, [4, 8])
        b = cwt(5.0 * x, [4, 8])
        for s in (4, 8):
            np.testing.assert_array_equal(modulus_maxima(a, s), modulus_maxima(b, s))


class TestPartition:
    def test_single_maximum(self):
        Z = partition_function(_field([0, 2, 0]), [-1.0, 0.0, 2.5])
        np.testing.assert_allclose(Z.values[:, 0], [0.5, 1.0, 2.0**2.5])

    def test_direct_sum(self):
        Z = partition_function(_field([0, 1, 0, 2, 0, 4, 0]), [0.0, 2.0])
        np.testing.assert_allclose(Z.values[:, 0], [3.0, 21.0])

    def test_no_maxima(self):
        with pytest.raises(NoMaximaAtScale):
            partition_function(_field([1, 2, 3]), [2.0])

    def test_exact_power_law(self):
        scales = np.array([4.0, 8, 16, 32, 64])
        qs = q_grid(-2, 5, 0.25)
        logz = (qs[:, None] - 1) * np.log(scales)[None, :]
        Z = PartitionFunction(qs, scales, logz, np.ones(5, dtype=int))
        np.testing.assert_allclose(wtmm_scaling_exponents(Z).tau, qs - 1, atol=1e-12)

    @settings(max_examples=30, deadline=None)
    @given(st.integers(0, 10_000))
    def test_log_convex_in_q(self, seed):
        x = np.random.default_rng(seed).standard_normal(512)
        qs = q_grid(-2, 4, 0.5)
        Z = partition_function(cwt(x, [4, 8, 16]), qs)
        d2 = Z.log_values[:-2] - 2 * Z.log_values[1:-1] + Z.log_values[2:]
        assert np.all(d2 >= -1e-9)


class TestAnalyze:
    def test_cascade(self, backend):
        r = wtmm_analyze(binomial_cascade(CascadeSpec(0.75, 16)))
        sel = (r.qs >= 0.5) & (r.qs <= 4)
        for q, t in zip(r.qs[sel], r.tau.tau[sel]):
            assert abs(t - analytic_cascade_tau(0.75, q)) <= 0.1
        assert r.tau.tau[r.qs == 0][0] == pytest.approx(-1.0, abs=0.15)
        pos = r.qs >= 0
        d2 = np.diff(r.tau.tau[pos], 2)
        assert np.all(d2 <= 0.02)

    def test_rescaling(self, rng):
        x = rng.standard_normal(8192)
        a = wtmm_analyze(x)
        b = wtmm_analyze(4.0 * x)
        np.testing.assert_allclose(a.tau.tau, b.tau.tau, atol=1e-12)

    def test_noise_narrower_than_cascade(self):
        c = wtmm_analyze(binomial_cascade(CascadeSpec(0.75, 15)))
        w = wtmm_analyze(white_noise(2**15, 2))
        assert w.fit.width < c.fit.width

    def test_metadata(self):
        r = wtmm_analyze(white_noise(4096, 0))
        assert r.metadata["low_confidence_q"] == [float(q) for q in r.qs if q < 0]
        assert r.scales[0] == 4 and r.scales[-1] == 256
        assert len(r.metadata["maxima_counts"]) == r.scales.size
        assert np.all(r.spectrum.qs >= 0)

    def test_valid_boundary_runs(self):
        cfg = AnalysisConfig(wtmm_boundary="valid")
        r = wtmm_analyze(white_noise(8192, 1), cfg)
        assert np.all(np.isfinite(r.tau.tau))

    def test_direct_matches_fft(self):
        x = white_noise(4096, 3)
        a = wtmm_analyze(x, AnalysisConfig(wtmm_engine="fft"))
        b = wtmm_analyze(x, AnalysisConfig(wtmm_engine="direct"))
        np.testing.assert_allclose(a.tau.tau, b.tau.tau, atol=1e-8)
