import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from csgi.errors import IncompatibleError, TooShortError, ZeroVarianceError
from csgi.timeseries import TimeSeries, autocorrelation_time, make_sequences, zscore


def ar1(n, phi, seed=0, sigma=1.0):
    rng = np.random.default_rng(seed)
    x = np.empty(n)
    x[0] = rng.standard_normal()
    noise = rng.standard_normal(n) * sigma
    for t in range(1, n):
        x[t] = phi * x[t - 1] + noise[t]
    return x


class TestTimeSeries:
    def test_rejects_nan(self):
        with pytest.raises(ValueError):
            TimeSeries([1.0, np.nan, 2.0])

    def test_rejects_inf(self):
        with pytest.raises(ValueError):
            TimeSeries([1.0, np.inf])

    def test_rejects_empty(self):
        with pytest.raises(TooShortError):
            TimeSeries([])

    def test_rejects_bad_dt(self):
        with pytest.raises(ValueError):
            TimeSeries([1.0, 2.0], dt=0.0)

    def test_values_read_only(self):
        ts = TimeSeries([1.0, 2.0, 3.0])
        with pytest.raises(ValueError):
            ts.values[0] = 9.0


class TestZscore:
    def test_symmetric_three_point(self):
        out = zscore(TimeSeries([1.0, 2.0, 3.0]))
        np.testing.assert_allclose(out.values, [-1.0, 0.0, 1.0], atol=1e-12)

    def test_constant_raises(self):
        with pytest.raises(ZeroVarianceError):
            zscore(TimeSeries([5.0, 5.0, 5.0]))

    def test_ar1_moments(self):
        # recompute moments after the transform
        out = zscore(TimeSeries(ar1(10_000, 0.8, seed=1)))
        assert abs(out.values.mean()) < 1e-9
        assert abs(out.values.std(ddof=1) - 1.0) < 1e-9

    def test_idempotent(self):
        ts = TimeSeries(ar1(5000, 0.5, seed=2))
        once = zscore(ts)
        twice = zscore(once)
        np.testing.assert_allclose(twice.values, once.values, atol=1e-9)

    def test_too_short(self):
        with pytest.raises(TooShortError):
            zscore(TimeSeries([1.0]))


class TestAutocorrelationTime:
    def test_white_noise_is_one(self):
        rng = np.random.default_rng(3)
        ts = TimeSeries(rng.standard_normal(100_000))
        assert autocorrelation_time(ts) == 1

    def test_ar1_matches_analytic(self):
        # rho(k) = 0.9^k crosses 1/e at ceil(-1/ln 0.9) = 10
        ts = TimeSeries(ar1(200_000, 0.9, seed=4))
        assert abs(autocorrelation_time(ts) - 10) <= 2

    def test_slow_sine_hits_cap(self):
        # a sine much slower than the lag cap stays above 1/e on the whole
        # search range, so the cap value is returned
        n = 400
        t = np.arange(n)
        ts = TimeSeries(np.sin(2 * np.pi * t / 600.0 + np.pi / 4))
        assert autocorrelation_time(ts) == n // 4

    def test_too_short(self):
        with pytest.raises(TooShortError):
            autocorrelation_time(TimeSeries(np.arange(50.0)))

    def test_invariant_under_zscore(self):
        ts = TimeSeries(ar1(50_000, 0.7, seed=5))
        assert autocorrelation_time(ts) == autocorrelation_time(zscore(ts))


class TestMakeSequences:
    def test_count_stride_one(self):
        ts = TimeSeries(np.arange(100.0))
        out = make_sequences(ts, ts, seq_length=10, lag=5, stride=1)
        assert len(out) == 86

    def test_count_large_stride(self):
        ts = TimeSeries(np.arange(100.0))
        out = make_sequences(ts, ts, seq_length=10, lag=5, stride=85)
        assert len(out) == 2

    def test_ramp_alignment(self):
        # on the identity ramp the target window content is the input
        # shifted by exactly lag, verifiable elementwise
        ts = TimeSeries(np.arange(100.0))
        out = make_sequences(ts, ts, seq_length=10, lag=5, stride=7)
        for i in range(len(out)):
            np.testing.assert_array_equal(out.targets[i], out.inputs[i] + 5.0)

    def test_length_mismatch(self):
        a = TimeSeries(np.arange(50.0))
        b = TimeSeries(np.arange(60.0))
        with pytest.raises(IncompatibleError):
            make_sequences(a, b, 10, 5)

    def test_too_short(self):
        ts = TimeSeries(np.arange(10.0))
        with pytest.raises(TooShortError):
            make_sequences(ts, ts, seq_length=8, lag=5)

    @given(
        stride=st.integers(min_value=1, max_value=20),
        seq_length=st.integers(min_value=2, max_value=30),
        lag=st.integers(min_value=1, max_value=20),
    )
    @settings(max_examples=40, deadline=None)
    def test_ramp_first_elements_form_arithmetic_sequence(self, stride, seq_length, lag):
        ts = TimeSeries(np.arange(200.0))
        out = make_sequences(ts, ts, seq_length=seq_length, lag=lag, stride=stride)
        firsts = out.inputs[:, 0]
        assert np.all(np.diff(firsts) == stride)
        expected = (200 - seq_length - lag) // stride + 1
        assert len(out) == expected
