"""Hybrid ARIMA / neural network forecasting with residual feedback."""

__version__ = "0.1.0"

from .arima import ArimaModel, ArimaOrder, arima_forecast, auto_arima, fit_arima, kpss_level_stat
from .errors import (DataError, DivergenceError, DomainError, EstimationError, ParnnError,
                     SearchError, ShapeError, SizingError, UndefinedMetricError)
from .intervals import SimulationConfig, forecast_interval, simulate_paths
from .metrics import mase, rmse, smape
from .model import (ParnnConfig, ParnnModel, fit_arnn, fit_fixed, fit_parnn, forecast_recursive,
                    grid_search, hidden_size)
from .series import Frequency, Term, TimeSeries, chronological_split, horizon_for

__all__ = [
    "ArimaModel", "ArimaOrder", "DataError", "DivergenceError", "DomainError", "EstimationError",
    "Frequency", "ParnnConfig", "ParnnError", "ParnnModel", "SearchError", "ShapeError",
    "SimulationConfig", "SizingError", "Term", "TimeSeries", "UndefinedMetricError",
    "arima_forecast", "auto_arima", "chronological_split", "fit_arima", "fit_arnn", "fit_fixed",
    "fit_parnn", "forecast_interval", "forecast_recursive", "grid_search", "hidden_size",
    "horizon_for", "kpss_level_stat", "mase", "rmse", "simulate_paths", "smape",
]
