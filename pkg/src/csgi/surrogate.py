"""Surrogate series generators.

A surrogate stands in for a candidate driver: it keeps chosen statistical
properties of the original signal (marginal distribution, or amplitude
spectrum) while destroying any temporal contingency with the partner series.
"""
from __future__ import annotations

import enum
import hashlib

import numpy as np

from .errors import TooShortError
from .timeseries import TimeSeries

__all__ = ["SurrogateKind", "uniform_surrogate", "fourier_surrogate", "make_surrogate", "series_seed"]


class SurrogateKind(enum.Enum):
    """Which statistical property the surrogate preserves."""

    UNIFORM_RANDOM = "uniform"
    FOURIER_PHASE = "fourier"


def uniform_surrogate(length: int, seed: int) -> TimeSeries:
    """I.i.d. draws from U[0, 1), reproducible per seed."""
    if length < 1:
        raise TooShortError("surrogate length must be >= 1")
    rng = np.random.default_rng(seed)
    return TimeSeries(rng.random(length), label="surrogate")


def fourier_surrogate(ts: TimeSeries, seed: int) -> TimeSeries:
    """Randomize Fourier phases while keeping the amplitude spectrum.

    DC and (for even lengths) Nyquist bins keep their phases so the output
    stays real and the mean is untouched; all other bins get uniform random
    phases applied with conjugate symmetry.
    """
    n = len(ts)
    if n < 4:
        raise TooShortError("fourier surrogate needs at least 4 samples")
    rng = np.random.default_rng(seed)
    spectrum = np.fft.fft(ts.values)
    half = (n - 1) // 2  # count of free positive-frequency bins
    phases = rng.uniform(0.0, 2.0 * np.pi, half)
    rotation = np.ones(n, dtype=complex)
    rotation[1 : half + 1] = np.exp(1j * phases)
    rotation[n - half :] = np.conj(rotation[1 : half + 1][::-1])
    randomized = spectrum * rotation
    out = np.fft.ifft(randomized)
    # conjugate symmetry makes the result real up to rounding
    assert np.max(np.abs(out.imag)) < 1e-10 * max(1.0, np.max(np.abs(out.real)))
    return TimeSeries(out.real, dt=ts.dt, label=f"{ts.label}:fourier-surrogate")


def make_surrogate(ts: TimeSeries, kind: SurrogateKind, seed: int) -> TimeSeries:
    """Dispatch on the surrogate kind; uniform draws match the series length."""
    if kind is SurrogateKind.UNIFORM_RANDOM:
        out = uniform_surrogate(len(ts), seed)
        return TimeSeries(out.values, dt=ts.dt, label=f"{ts.label}:uniform-surrogate")
    if kind is SurrogateKind.FOURIER_PHASE:
        return fourier_surrogate(ts, seed)
    raise ValueError(f"unknown surrogate kind {kind!r}")


def series_seed(base_seed: int, values: np.ndarray) -> int:
    """Seed derived from series content, so a series keeps the same surrogate
    stream no matter which argument slot it is passed in."""
    digest = hashlib.sha256(np.ascontiguousarray(values, dtype=np.float64).tobytes())
    content = int.from_bytes(digest.digest()[:8], "little")
    mix = np.random.SeedSequence([base_seed & 0xFFFFFFFFFFFFFFFF, content])
    return int(mix.generate_state(1, np.uint64)[0])
