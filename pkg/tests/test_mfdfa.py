import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from mfspeech.audio_io import TimeSeries
from mfspeech.config import AnalysisConfig
from mfspeech.errors import InvalidGrid, TooShort, ZeroLocalFluctuation
from mfspeech.grids import dyadic_scales, log_scales, q_grid
from mfspeech.mfdfa import (
    FluctuationSurface,
    detrend_basis,
    fluctuation_function,
    hurst_exponents,
    local_fluctuation,
    mfdfa_analyze,
    profile,
    segment_count,
)
from mfspeech.synth import CascadeSpec, analytic_cascade_h, binomial_cascade, fgn, white_noise


def plain_dfa(x, scales, order=1):
    """Textbook DFA with np.polyfit per window; used as an oracle."""
    y = np.cumsum(np.asarray(x) - np.mean(x))
    out = []
    for s in scales:
        t = np.arange(s)
        f2 = []
        for v in range(len(y) // s):
            seg = y[v * s : (v + 1) * s]
            fit = np.polyval(np.polyfit(t, seg, order), t)
            f2.append(np.mean((seg - fit) ** 2))
        out.append(np.sqrt(np.mean(f2)))
    return np.array(out)


class TestProfile:
    def test_constant(self):
        assert profile(TimeSeries([3.0, 3.0, 3.0])).tolist() == [0.0, 0.0, 0.0]

    def test_alternating(self):
        np.testing.assert_allclose(profile([1.0, -1.0, 1.0, -1.0]), [1.0, 0.0, 1.0, 0.0])

    def test_ramp(self):
        np.testing.assert_allclose(profile([1.0, 2.0, 3.0]), [-1.0, -1.0, 0.0])

    def test_too_short(self):
        with pytest.raises(TooShort):
            profile([1.0])

    @settings(max_examples=100, deadline=None)
    @given(arrays(np.float64, st.integers(2, 300), elements=st.floats(-1e3, 1e3)))
    def test_ends_at_zero(self, x):
        y = profile(x)
        assert y.size == x.size
        assert abs(y[-1]) <= 4 * x.size * np.finfo(float).eps * max(np.max(np.abs(x)), 1e-300)


@pytest.mark.parametrize("n, s, expected", [(1000, 100, 10), (1000, 333, 3), (7, 7, 1)])
def test_segment_count(n, s, expected):
    assert segment_count(n, s) == expected


class TestLocalFluctuation:
    def test_linear_removed(self):
        p = 3.0 + 0.5 * np.arange(64.0)
        assert local_fluctuation(p, 16, 2, order=1) <= 1e-20 * np.mean(p[16:32] ** 2)

    def test_order_zero(self):
        assert local_fluctuation([0.0, 1.0, 0.0, 1.0], 4, 1, order=0) == pytest.approx(0.25)

    def test_nested(self, rng):
        p = np.cumsum(rng.standard_normal(400))
        for v in range(1, 9):
            assert local_fluctuation(p, 50, v, 2) <= local_fluctuation(p, 50, v, 1) + 1e-12

    def test_matches_polyfit(self, rng):
        p = np.cumsum(rng.standard_normal(300))
        seg = p[100:200]
        t = np.arange(100)
        for order in range(4):
            resid = seg - np.polyval(np.polyfit(t, seg, order), t)
            assert local_fluctuation(p, 100, 2, order) == pytest.approx(np.mean(resid**2), rel=1e-10)

    def test_bad_index(self):
        with pytest.raises(InvalidGrid):
            local_fluctuation(np.arange(10.0), 5, 3)

    def test_basis_orthonormal(self):
        for s, order in [(4, 2), (16, 1), (100, 3)]:
            b = detrend_basis(s, order)
            np.testing.assert_allclose(b.T @ b, np.eye(order + 1), atol=1e-12)


class TestFluctuationFunction:
    @pytest.mark.parametrize("order", [1, 2])
    def test_q2_is_dfa(self, order, rng, backend):
        x = rng.standard_normal(3000)
        scales = np.array([8, 16, 40, 100, 300, 700])
        F = fluctuation_function(profile(x), scales, [2.0], order)
        np.testing.assert_allclose(F.values[0], plain_dfa(x, scales, order), rtol=1e-10)

    def test_constant_segments(self):
        # sawtooth profile gives identical F^2 in every window
        p = np.tile(np.array([0.0, 1.0, 0.0, 1.0]), 50)
        F = fluctuation_function(p, [4, 8], [-3.0, 0.0, 2.0, 5.0], order=0)
        np.testing.assert_allclose(F.values, 0.5, rtol=1e-12)

    def test_zero_segment_negative_q(self):
        p = np.concatenate([np.zeros(16), np.cumsum(np.random.default_rng(0).standard_normal(48))])
        with pytest.raises(ZeroLocalFluctuation) as err:
            fluctuation_function(p, [16], [-1.0])
        assert err.value.scale == 16 and err.value.segment == 1
        F = fluctuation_function(p, [16], [2.0])
        assert np.all(F.values > 0)

    @settings(max_examples=30, deadline=None)
    @given(st.integers(0, 10_000))
    def test_monotone_in_q(self, seed):
        x = np.random.default_rng(seed).standard_normal(1024)
        F = fluctuation_function(profile(x), [16, 32, 64, 128], q_grid(-5, 5, 0.5))
        assert np.all(np.diff(F.values, axis=0) >= -1e-12 * F.values[1:])

    def test_scale_covariance(self, rng):
        x = rng.standard_normal(2048)
        qs = q_grid(-3, 3, 1)
        a = fluctuation_function(profile(x), [16, 64, 256], qs)
        b = fluctuation_function(profile(7.5 * x), [16, 64, 256], qs)
        np.testing.assert_allclose(b.values, 7.5 * a.values, rtol=1e-12)

    def test_bidirectional_uses_tail(self, rng):
        x = rng.standard_normal(1000)
        scales = [300]
        fwd = fluctuation_function(profile(x), scales, [2.0])
        both = fluctuation_function(profile(x), scales, [2.0], bidirectional=True)
        y = profile(x)
        t = np.arange(300)
        f2 = []
        for seg in [y[0:300], y[300:600], y[600:900], y[700:1000], y[400:700], y[100:400]]:
            f2.append(np.mean((seg - np.polyval(np.polyfit(t, seg, 1), t)) ** 2))
        assert both.values[0, 0] == pytest.approx(np.sqrt(np.mean(f2)), rel=1e-10)
        assert fwd.values[0, 0] == pytest.approx(np.sqrt(np.mean(f2[:3])), rel=1e-10)

    def test_scale_bounds(self):
        with pytest.raises(InvalidGrid):
            fluctuation_function(np.arange(100.0), [2, 16], [2.0], order=1)


class TestHurst:
    def test_exact_power_law(self):
        scales = np.array([16.0, 32, 64, 128, 256])
        qs = q_grid(-5, 5, 0.25)
        F = FluctuationSurface(qs, scales, np.tile(scales**0.7, (qs.size, 1)))
        np.testing.assert_allclose(hurst_exponents(F).h, 0.7, atol=1e-12)

    def test_needs_four_scales(self):
        F = FluctuationSurface(np.array([2.0]), np.array([8.0, 16, 32]), np.ones((1, 3)))
        with pytest.raises(InvalidGrid):
            hurst_exponents(F)

    @pytest.mark.parametrize("seed", [1, 2, 3])
    def test_white_noise(self, seed):
        r = mfdfa_analyze(white_noise(2**16, seed))
        assert 0.45 <= r.hurst.h[r.qs == 2.0][0] <= 0.55

    def test_fgn(self):
        r = mfdfa_analyze(fgn(2**16, 0.7, 4))
        assert 0.65 <= r.hurst.h[r.qs == 2.0][0] <= 0.75


class TestAnalyze:
    def test_cascade(self, backend):
        x = binomial_cascade(CascadeSpec(0.75, 16))
        r = mfdfa_analyze(x, scales=dyadic_scales(16, 2**14))
        for q in (-5, -4, -3, -2, -1, 1, 2, 3, 4, 5):
            assert abs(r.hurst.h[r.qs == q][0] - analytic_cascade_h(0.75, q)) <= 0.05
        assert np.all(np.diff(r.hurst.h) <= 0.02)

    def test_cascade_default_grid(self):
        r = mfdfa_analyze(binomial_cascade(CascadeSpec(0.75, 16)))
        for q in (-5, -4, -3, -2, -1, 1, 2, 3, 4, 5):
            assert abs(r.hurst.h[r.qs == q][0] - analytic_cascade_h(0.75, q)) <= 0.05

    def test_scale_invariance(self, rng):
        x = rng.standard_normal(4096)
        a = mfdfa_analyze(x)
        b = mfdfa_analyze(3.0 * x)
        np.testing.assert_allclose(a.hurst.h, b.hurst.h, atol=1e-12)

    def test_constant(self):
        with pytest.raises(ZeroLocalFluctuation):
            mfdfa_analyze(np.full(1024, 2.5))

    def test_too_short(self):
        with pytest.raises(TooShort):
            mfdfa_analyze(np.ones(63))

    def test_default_scales(self):
        r = mfdfa_analyze(white_noise(4096, 0))
        np.testing.assert_array_equal(r.scales, log_scales(16, 1024, 20))
        assert r.scales[0] == 16 and r.scales[-1] == 1024
        assert r.qs.size == 41 and np.count_nonzero(r.qs == 0) == 1

    def test_order_two(self, rng):
        cfg = AnalysisConfig(detrend_order=2)
        r = mfdfa_analyze(rng.standard_normal(8192), cfg)
        assert r.metadata["detrend_order"] == 2
        assert np.all(np.isfinite(r.hurst.h))
