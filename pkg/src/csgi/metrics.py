"""Causal-inference scoring: explained variance, the Comparative Surrogate
Granger Index (CSGI), rolling-window evaluation with bootstrap error bars,
and directionality summaries.

The CSGI for a direction compares a predictor that saw the real driver
against one that saw a surrogate driver:

    chi = (r2_full - r2_surrogate) / (0.5 * (r2_full + r2_surrogate))

with both explained-variance fractions floored at zero first, and chi
defined as 0 when neither model explains anything. chi therefore lives in
[-2, 2]; positive values mean the real driver carries predictive
information about the target's future.
"""
from __future__ import annotations

import io
from dataclasses import dataclass

import numpy as np

from .errors import TooShortError, ZeroVarianceError

__all__ = [
    "r_squared",
    "egci",
    "csgi",
    "directionality",
    "directionality_matrix",
    "rolling_csgi",
    "CsgiSeries",
    "CsgiTimecourse",
    "DirectionalityMatrix",
]

_FLOOR_EPS = 1e-12


def r_squared(predicted, actual) -> float:
    """Fraction of variance explained, 1 - SS_res/SS_tot.

    Negative for predictors worse than the actual's mean.
    """
    p = np.asarray(predicted, dtype=np.float64)
    a = np.asarray(actual, dtype=np.float64)
    if p.shape != a.shape:
        raise ValueError(f"length mismatch: {p.shape} vs {a.shape}")
    if a.size < 2:
        raise TooShortError("r_squared needs at least two points")
    ss_tot = np.sum((a - a.mean()) ** 2)
    if ss_tot == 0.0:
        raise ZeroVarianceError("actual values are constant")
    ss_res = np.sum((a - p) ** 2)
    return float(1.0 - ss_res / ss_tot)


def egci(var_resid_joint: float, var_resid_self: float) -> float:
    """Relative reduction in residual variance when the driver is added."""
    if var_resid_self <= 0.0:
        raise ZeroVarianceError("self-model residual variance must be positive")
    if var_resid_joint < 0.0:
        raise ValueError("residual variance cannot be negative")
    return 1.0 - var_resid_joint / var_resid_self


def csgi(r2_full: float, r2_surrogate: float) -> float:
    """Comparative Surrogate Granger Index for one direction.

    Inputs are floored at 0 (a worse-than-mean model carries no evidence);
    when both floored values vanish the index is 0 by convention.
    """
    if not (np.isfinite(r2_full) and np.isfinite(r2_surrogate)):
        raise ValueError("explained-variance inputs must be finite")
    a = max(r2_full, 0.0)
    b = max(r2_surrogate, 0.0)
    if a < _FLOOR_EPS and b < _FLOOR_EPS:
        return 0.0
    return (a - b) / (0.5 * (a + b))


def directionality(chi_xy: float, chi_yx: float) -> float:
    """Net direction of influence: chi one way minus chi the other way."""
    if not (np.isfinite(chi_xy) and np.isfinite(chi_yx)):
        raise ValueError("chi inputs must be finite")
    return chi_xy - chi_yx


@dataclass(frozen=True)
class CsgiSeries:
    """Rolling-window CSGI for a single direction."""

    window_starts: np.ndarray
    chi: np.ndarray
    std: np.ndarray
    n_bootstrap: int

    def __post_init__(self):
        if not (len(self.window_starts) == len(self.chi) == len(self.std)):
            raise ValueError("window arrays must share length")
        if self.n_bootstrap < 1:
            raise ValueError("n_bootstrap must be >= 1")

    @property
    def mean_chi(self) -> float:
        return float(np.mean(self.chi))

    @property
    def pooled_std(self) -> float:
        """RMS of the per-window bootstrap standard deviations."""
        return float(np.sqrt(np.mean(self.std**2)))


@dataclass(frozen=True)
class CsgiTimecourse:
    """Per-window CSGI means and bootstrap spreads for both directions."""

    window_starts: np.ndarray
    chi_xy: np.ndarray
    std_xy: np.ndarray
    chi_yx: np.ndarray
    std_yx: np.ndarray
    n_bootstrap: int

    def __post_init__(self):
        n = len(self.window_starts)
        for name in ("chi_xy", "std_xy", "chi_yx", "std_yx"):
            if len(getattr(self, name)) != n:
                raise ValueError(f"{name} length differs from window_starts")
        if self.n_bootstrap < 1:
            raise ValueError("n_bootstrap must be >= 1")

    @classmethod
    def from_directions(cls, xy: CsgiSeries, yx: CsgiSeries) -> "CsgiTimecourse":
        if len(xy.window_starts) != len(yx.window_starts) or np.any(
            xy.window_starts != yx.window_starts
        ):
            raise ValueError("direction series cover different windows")
        if xy.n_bootstrap != yx.n_bootstrap:
            raise ValueError("direction series used different bootstrap counts")
        return cls(
            window_starts=xy.window_starts,
            chi_xy=xy.chi,
            std_xy=xy.std,
            chi_yx=yx.chi,
            std_yx=yx.std,
            n_bootstrap=xy.n_bootstrap,
        )

    def to_csv(self) -> str:
        """Stable CSV schema: window_start, chi_xy, std_xy, chi_yx, std_yx."""
        buf = io.StringIO()
        buf.write("window_start,chi_xy,std_xy,chi_yx,std_yx\n")
        for i in range(len(self.window_starts)):
            buf.write(
                f"{int(self.window_starts[i])},{float(self.chi_xy[i])!r},"
                f"{float(self.std_xy[i])!r},{float(self.chi_yx[i])!r},"
                f"{float(self.std_yx[i])!r}\n"
            )
        return buf.getvalue()

    @classmethod
    def from_csv(cls, text: str, n_bootstrap: int = 1) -> "CsgiTimecourse":
        lines = [ln for ln in text.strip().splitlines() if ln]
        header = lines[0].split(",")
        if header != ["window_start", "chi_xy", "std_xy", "chi_yx", "std_yx"]:
            raise ValueError(f"unexpected header {header}")
        rows = [ln.split(",") for ln in lines[1:]]
        cols = list(zip(*rows)) if rows else [[]] * 5
        return cls(
            window_starts=np.array([int(v) for v in cols[0]]),
            chi_xy=np.array([float(v) for v in cols[1]]),
            std_xy=np.array([float(v) for v in cols[2]]),
            chi_yx=np.array([float(v) for v in cols[3]]),
            std_yx=np.array([float(v) for v in cols[4]]),
            n_bootstrap=n_bootstrap,
        )


@dataclass(frozen=True)
class DirectionalityMatrix:
    """Antisymmetric matrix of mean chi differences between labeled regions."""

    regions: tuple
    values: np.ndarray

    def __post_init__(self):
        g = len(self.regions)
        if self.values.shape != (g, g):
            raise ValueError("values must be square over the region labels")
        if np.max(np.abs(self.values + self.values.T)) > 1e-12:
            raise ValueError("directionality matrix must be antisymmetric")


def directionality_matrix(regions, chi_means: np.ndarray) -> DirectionalityMatrix:
    """Build the directionality matrix from a square matrix of mean chi
    values, entry [i, j] holding the mean chi for direction i -> j."""
    chi_means = np.asarray(chi_means, dtype=np.float64)
    return DirectionalityMatrix(
        regions=tuple(regions), values=chi_means - chi_means.T
    )


def _bootstrap_r2(values: np.ndarray, actual: np.ndarray, idx: np.ndarray) -> np.ndarray:
    """r_squared of values[idx] against actual[idx], one row of idx per
    bootstrap replicate, without flooring."""
    a = actual[idx]  # (nb, w)
    p = values[idx]
    ss_res = np.sum((a - p) ** 2, axis=1)
    mean_a = a.mean(axis=1, keepdims=True)
    ss_tot = np.sum((a - mean_a) ** 2, axis=1)
    if np.any(ss_tot == 0.0):
        raise ZeroVarianceError("a bootstrap resample of the actuals is constant")
    return 1.0 - ss_res / ss_tot


def rolling_csgi(
    pred_full,
    pred_surrogate,
    actual,
    window_len: int,
    stride: int,
    n_bootstrap: int,
    seed: int,
    window_offset: int = 0,
) -> CsgiSeries:
    """Window-by-window CSGI with bootstrap error bars, one direction.

    Within each window, `n_bootstrap` resamples draw time indices with
    replacement; the same index multiset is applied to predictions and
    actuals, both explained-variance fractions are recomputed, and the CSGI
    of each resample is collected. Reported chi and std are the mean and
    (population) standard deviation over resamples; a single resample
    reports std 0. `window_offset` shifts the reported start indices, for
    callers whose predictions begin part-way into the original series.
    """
    pf = np.asarray(pred_full, dtype=np.float64)
    ps = np.asarray(pred_surrogate, dtype=np.float64)
    a = np.asarray(actual, dtype=np.float64)
    if not (pf.shape == ps.shape == a.shape):
        raise ValueError("prediction and actual arrays must share shape")
    if window_len < 10:
        raise TooShortError("window_len must be >= 10")
    if stride < 1:
        raise ValueError("stride must be >= 1")
    if n_bootstrap < 1:
        raise ValueError("n_bootstrap must be >= 1")
    n = a.size
    if n < window_len:
        raise TooShortError(f"series length {n} shorter than window {window_len}")
    n_windows = (n - window_len) // stride + 1
    rng = np.random.default_rng(seed)
    starts = np.empty(n_windows, dtype=np.int64)
    chi = np.empty(n_windows)
    std = np.empty(n_windows)
    for w in range(n_windows):
        lo = w * stride
        idx = lo + rng.integers(0, window_len, size=(n_bootstrap, window_len))
        r2f = np.maximum(_bootstrap_r2(pf, a, idx), 0.0)
        r2s = np.maximum(_bootstrap_r2(ps, a, idx), 0.0)
        denom = 0.5 * (r2f + r2s)
        degenerate = (r2f < _FLOOR_EPS) & (r2s < _FLOOR_EPS)
        chis = np.where(
            degenerate, 0.0, (r2f - r2s) / np.where(degenerate, 1.0, denom)
        )
        starts[w] = lo + window_offset
        chi[w] = chis.mean()
        std[w] = chis.std()
    return CsgiSeries(window_starts=starts, chi=chi, std=std, n_bootstrap=n_bootstrap)
