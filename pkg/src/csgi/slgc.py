"""Surrogate Linear Granger Causality: ordinary-least-squares vector
autoregression scored with the Comparative Surrogate Granger Index.

For direction x -> y, one model regresses future y on lagged (x, y) and a
second on lagged (x_surrogate, y); both are fit once on the full series and
compared window by window. Surrogate and bootstrap seeds are derived from
the series content, so swapping the argument order only swaps the reported
directions.
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .errors import SingularDesignWarning, TooShortError
from .metrics import CsgiTimecourse, rolling_csgi
from .surrogate import SurrogateKind, make_surrogate, series_seed
from .timeseries import TimeSeries, autocorrelation_time

__all__ = ["VarModel", "fit_var", "slgc_pair", "default_order"]


@dataclass(frozen=True)
class VarModel:
    """Linear autoregressive model of one target with one exogenous driver.

    Predicts target(t) from k lags of the target (coeffs_self), k lags of
    the driver (coeffs_cross), and an intercept.
    """

    order: int
    coeffs_self: np.ndarray
    coeffs_cross: np.ndarray
    intercept: float
    singular: bool = False

    def __post_init__(self):
        if self.order < 1:
            raise ValueError("order must be >= 1")
        if len(self.coeffs_self) != self.order or len(self.coeffs_cross) != self.order:
            raise ValueError("coefficient arrays must have length = order")

    def predict(self, driver: np.ndarray, target: np.ndarray) -> np.ndarray:
        """One-step-ahead predictions for t = order..n-1."""
        design, _ = _design_matrix(driver, target, self.order)
        params = np.concatenate(
            [[self.intercept], self.coeffs_self, self.coeffs_cross]
        )
        return design @ params


def _design_matrix(driver: np.ndarray, target: np.ndarray, order: int):
    """Design [1, target lags 1..k, driver lags 1..k] and response target(t)."""
    n = target.size
    rows = n - order
    design = np.empty((rows, 1 + 2 * order))
    design[:, 0] = 1.0
    for lag in range(1, order + 1):
        design[:, lag] = target[order - lag : n - lag]
        design[:, order + lag] = driver[order - lag : n - lag]
    return design, target[order:]


def default_order(target: TimeSeries, cap: int = 20) -> int:
    """Model order heuristic: the target's autocorrelation time, capped."""
    return max(1, min(cap, autocorrelation_time(target)))


def fit_var(driver: TimeSeries, target: TimeSeries, order: int) -> VarModel:
    """Ordinary least squares fit of the lagged-regression model.

    A rank-deficient design falls back to the minimum-norm pseudoinverse
    solution and sets the model's singular flag (with a warning).
    """
    if len(driver) != len(target):
        raise TooShortError("driver and target must have equal length")
    if order < 1:
        raise ValueError("order must be >= 1")
    if len(target) <= 10 * order:
        raise TooShortError(
            f"need length > 10*order = {10 * order}, got {len(target)}"
        )
    design, response = _design_matrix(driver.values, target.values, order)
    params, _, rank, _ = np.linalg.lstsq(design, response, rcond=None)
    singular = rank < design.shape[1]
    if singular:
        warnings.warn(
            "rank-deficient design; coefficients are the minimum-norm solution",
            SingularDesignWarning,
        )
    return VarModel(
        order=order,
        coeffs_self=params[1 : order + 1],
        coeffs_cross=params[order + 1 :],
        intercept=float(params[0]),
        singular=singular,
    )


def slgc_pair(
    x: TimeSeries,
    y: TimeSeries,
    order: int | None = None,
    surrogate_kind: SurrogateKind = SurrogateKind.UNIFORM_RANDOM,
    window_len: int = 1000,
    stride: int | None = None,
    n_bootstrap: int = 100,
    seed: int = 0,
) -> CsgiTimecourse:
    """Rolling CSGI timecourse for both directions of a series pair.

    Models are fit once on the full series (no per-window refits) and their
    one-step predictions are scored over rolling windows. Returns a
    timecourse whose chi_xy entry is the x -> y direction.
    """
    if order is None:
        order = max(default_order(x), default_order(y))
    if stride is None:
        stride = window_len

    def one_direction(driver: TimeSeries, target: TimeSeries):
        surr = make_surrogate(
            driver, surrogate_kind, series_seed(seed, driver.values)
        )
        full = fit_var(driver, target, order)
        surrogate_model = fit_var(surr, target, order)
        pred_full = full.predict(driver.values, target.values)
        pred_surr = surrogate_model.predict(surr.values, target.values)
        actual = target.values[order:]
        return rolling_csgi(
            pred_full,
            pred_surr,
            actual,
            window_len=window_len,
            stride=stride,
            n_bootstrap=n_bootstrap,
            seed=series_seed(seed + 1, target.values),
            window_offset=order,
        )

    return CsgiTimecourse.from_directions(
        xy=one_direction(x, y), yx=one_direction(y, x)
    )
