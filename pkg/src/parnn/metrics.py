"""Forecast accuracy measures: MASE, RMSE and SMAPE."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ShapeError, UndefinedMetricError
from .series import as_values


def _pair(actual, predicted):
    a = as_values(actual)
    f = as_values(predicted)
    if a.size != f.size:
        raise ShapeError(f"actual has {a.size} values, predicted has {f.size}")
    if a.size < 1:
        raise ShapeError("need at least one forecast")
    return a, f


def mase(train, actual, predicted, seasonal_period: int = 1) -> float:
    """Mean absolute error scaled by the in-sample seasonal naive error.

    The denominator averages ``|y[i] - y[i-S]|`` over the ``M - S`` training
    differences available.
    """
    y = as_values(train)
    a, f = _pair(actual, predicted)
    S = seasonal_period
    if y.size <= S:
        raise ShapeError(f"training length {y.size} must exceed the seasonal period {S}")
    naive = np.abs(y[S:] - y[:-S]).sum()
    if naive == 0:
        raise UndefinedMetricError("MASE undefined: seasonal naive error is zero on the training data")
    return float(np.abs(a - f).sum() / (a.size / (y.size - S) * naive))


def rmse(actual, predicted) -> float:
    a, f = _pair(actual, predicted)
    return float(np.sqrt(np.mean((a - f) ** 2)))


def smape(actual, predicted) -> float:
    """Symmetric MAPE in percent, bounded by 200."""
    a, f = _pair(actual, predicted)
    denom = (np.abs(a) + np.abs(f)) / 2.0
    if np.any(denom == 0):
        raise UndefinedMetricError("SMAPE undefined where actual and forecast are both zero")
    return float(np.mean(np.abs(a - f) / denom) * 100.0)


@dataclass(frozen=True)
class EvalContext:
    train: np.ndarray
    actual: np.ndarray
    predicted: np.ndarray
    seasonal_period: int = 1

    def scores(self) -> dict[str, float]:
        return {
            "mase": mase(self.train, self.actual, self.predicted, self.seasonal_period),
            "rmse": rmse(self.actual, self.predicted),
            "smape": smape(self.actual, self.predicted),
        }
