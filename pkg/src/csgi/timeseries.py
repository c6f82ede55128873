"""Core time-series container plus normalization, windowing, and
autocorrelation-time estimation used by every other module.

All functions here are pure: they never mutate their inputs, and TimeSeries
wraps a read-only array, so values can be shared freely across workers.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import IncompatibleError, TooShortError, ZeroVarianceError

__all__ = [
    "TimeSeries",
    "SequenceSet",
    "zscore",
    "autocorrelation_time",
    "make_sequences",
]


@dataclass(frozen=True)
class TimeSeries:
    """A uniformly sampled scalar signal.

    values must be finite and non-empty; dt is the sampling interval in
    arbitrary time units. The wrapped array is made read-only.
    """

    values: np.ndarray
    dt: float = 1.0
    label: str = ""

    def __post_init__(self):
        arr = np.asarray(self.values, dtype=np.float64)
        if arr.ndim != 1:
            raise IncompatibleError(f"values must be 1-D, got shape {arr.shape}")
        if arr.size < 1:
            raise TooShortError("a TimeSeries needs at least one sample")
        if not np.all(np.isfinite(arr)):
            raise ValueError(f"non-finite values in series {self.label!r}")
        if not self.dt > 0:
            raise ValueError(f"dt must be positive, got {self.dt}")
        arr = arr.copy()
        arr.flags.writeable = False
        object.__setattr__(self, "values", arr)

    def __len__(self) -> int:
        return self.values.size


@dataclass(frozen=True)
class SequenceSet:
    """Paired input/target windows cut from two aligned series.

    Target window i starts exactly `lag` steps after input window i; both
    windows have length `seq_length`. Arrays have shape (count, seq_length).
    """

    inputs: np.ndarray
    targets: np.ndarray
    seq_length: int
    lag: int
    starts: np.ndarray = field(repr=False, default=None)

    def __post_init__(self):
        if self.inputs.shape != self.targets.shape:
            raise IncompatibleError(
                f"inputs {self.inputs.shape} vs targets {self.targets.shape}"
            )
        if self.inputs.shape[1] != self.seq_length:
            raise IncompatibleError("window width does not match seq_length")

    def __len__(self) -> int:
        return self.inputs.shape[0]


def zscore(ts: TimeSeries) -> TimeSeries:
    """Rescale to zero sample mean and unit sample standard deviation."""
    if len(ts) < 2:
        raise TooShortError("zscore needs at least two samples")
    std = ts.values.std(ddof=1)
    if std == 0.0:
        raise ZeroVarianceError(f"series {ts.label!r} is constant")
    return TimeSeries((ts.values - ts.values.mean()) / std, dt=ts.dt, label=ts.label)


def autocorrelation_time(ts: TimeSeries) -> int:
    """Smallest lag at which the normalized autocorrelation drops below 1/e.

    Uses the unbiased estimator (lag-k covariance divided by its n-k
    overlapping terms). The search runs over lags 1..len/4; if the
    autocorrelation stays above 1/e on that whole range the cap len/4 is
    returned.
    """
    n = len(ts)
    if n < 100:
        raise TooShortError(f"autocorrelation_time needs >= 100 samples, got {n}")
    cap = n // 4
    x = ts.values - ts.values.mean()
    nfft = 1 << int(np.ceil(np.log2(2 * n - 1)))
    spec = np.fft.rfft(x, nfft)
    acov = np.fft.irfft(spec * np.conj(spec), nfft)[: cap + 1]
    acov /= n - np.arange(cap + 1)
    if acov[0] <= 0.0:
        raise ZeroVarianceError(f"series {ts.label!r} is constant")
    acf = acov / acov[0]
    below = np.nonzero(acf[1:] < 1.0 / np.e)[0]
    if below.size == 0:
        return cap
    return int(below[0]) + 1


def make_sequences(
    ts_in: TimeSeries,
    ts_target: TimeSeries,
    seq_length: int,
    lag: int,
    stride: int = 1,
) -> SequenceSet:
    """Tile two aligned series into (input window, lag-shifted target window)
    pairs at the given stride.

    Window i covers in[i*stride : i*stride+seq_length] and
    target[i*stride+lag : i*stride+lag+seq_length]; the pair count is
    floor((n - seq_length - lag)/stride) + 1.
    """
    if len(ts_in) != len(ts_target):
        raise IncompatibleError(
            f"series lengths differ: {len(ts_in)} vs {len(ts_target)}"
        )
    if seq_length < 1 or lag < 1:
        raise ValueError("seq_length and lag must be positive")
    if stride < 1:
        raise ValueError("stride must be >= 1")
    n = len(ts_in)
    if seq_length + lag > n:
        raise TooShortError(
            f"need seq_length + lag <= {n}, got {seq_length} + {lag}"
        )
    count = (n - seq_length - lag) // stride + 1
    starts = np.arange(count) * stride
    offsets = np.arange(seq_length)
    inputs = ts_in.values[starts[:, None] + offsets]
    targets = ts_target.values[starts[:, None] + lag + offsets]
    return SequenceSet(
        inputs=inputs, targets=targets, seq_length=seq_length, lag=lag, starts=starts
    )
