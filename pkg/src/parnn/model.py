"""PARNN(p, k, q): ARIMA residual feedback into an autoregressive neural network.

Stage one fits an automatic ARIMA to the training series and keeps its
in-sample residuals ``e``. Stage two trains an ensemble of single-hidden-layer
networks on ``p`` lags of ``y`` and ``q`` lags of ``e``; the forecast is the
ensemble mean, iterated for multi-step horizons with unknown future
residuals set to zero.

The plain ARNN baseline is the same machinery with ``q = 0`` and no ARIMA
stage.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field, replace
from typing import Callable

import numpy as np

from . import metrics
from .arima import ArimaModel, arima_extend, auto_arima
from .errors import EstimationError, SearchError, SizingError, UndefinedMetricError
from .neuralnet import NetworkWeights, Stack, TrainConfig, init_network, train_stack
from .series import BoxCoxParam, TimeSeries, as_series, as_values, boxcox_param_for, boxcox_values

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class ParnnConfig:
    max_p: int = 10
    max_q: int = 10
    reps: int = 500
    train_cfg: TrainConfig = field(default_factory=TrainConfig)
    base_seed: int = 0
    search_reps: int = 20
    arima_max_p: int = 5
    arima_max_q: int = 5
    arima_max_d: int = 2
    boxcox_lambda: float = 0.5
    max_diverged_frac: float = 0.1

    def __post_init__(self):
        if self.max_p < 1 or self.max_q < 1:
            raise ValueError("max_p and max_q must be >= 1")
        if self.reps < 1 or self.search_reps < 1:
            raise ValueError("reps must be >= 1")


@dataclass(frozen=True)
class Standardizer:
    y_mean: float
    y_scale: float
    e_mean: float = 0.0
    e_scale: float = 1.0

    @classmethod
    def fit(cls, y, e=None) -> "Standardizer":
        y = np.asarray(y, dtype=np.float64)
        ys = float(np.std(y)) or 1.0
        if e is None:
            return cls(float(np.mean(y)), ys)
        e = np.asarray(e, dtype=np.float64)
        return cls(float(np.mean(y)), ys, float(np.mean(e)), float(np.std(e)) or 1.0)

    def y(self, v):
        return (np.asarray(v, dtype=np.float64) - self.y_mean) / self.y_scale

    def y_inv(self, z):
        return np.asarray(z, dtype=np.float64) * self.y_scale + self.y_mean

    def e(self, v):
        return (np.asarray(v, dtype=np.float64) - self.e_mean) / self.e_scale


@dataclass(frozen=True, eq=False)
class ParnnModel:
    """A fitted PARNN (or, with ``q == 0`` and no ARIMA stage, ARNN)."""

    arima: ArimaModel | None
    p: int
    q: int
    k: int
    ensemble: list[NetworkWeights]
    standardization: Standardizer
    residual_sigma: float
    boxcox: BoxCoxParam
    y_history: np.ndarray
    e_history: np.ndarray
    validation_mase: float = math.nan
    n_diverged: int = 0

    def __post_init__(self):
        object.__setattr__(self, "_stack", Stack.of(self.ensemble))

    @property
    def stack(self) -> Stack:
        return self._stack

    @property
    def pkq(self) -> tuple[int, int, int]:
        return self.p, self.k, self.q


def hidden_size(p: int, q: int) -> int:
    """Hidden units: (p + q + 1) / 2 rounded half up."""
    return (p + q + 2) // 2


def _design(y: np.ndarray, e: np.ndarray, p: int, q: int):
    n = y.size
    start = max(p, q)
    cols = [y[start - i:n - i] for i in range(1, p + 1)]
    cols += [e[start - i:n - i] for i in range(1, q + 1)]
    return np.column_stack(cols), y[start:].copy()


def build_training_pairs(y, e, p: int, q: int):
    """Predictor rows ``(y[t-1..t-p], e[t-1..t-q])`` and targets ``y[t]``.

    Rows start at ``t = max(p, q)`` (zero-based). Values are returned on the
    scale given; standardisation happens in :func:`fit_fixed`.
    """
    y, e = as_values(y), as_values(e)
    if p < 1 or q < 1:
        raise ValueError("p and q must both be >= 1")
    if y.size != e.size:
        raise SizingError(f"series and residuals differ in length ({y.size} vs {e.size})")
    if y.size <= max(p, q):
        raise SizingError(f"need more than {max(p, q)} observations, got {y.size}")
    return _design(y, e, p, q)


def _train_ensemble(Xs, ts, n_inputs, k, reps, cfg: ParnnConfig):
    tc = cfg.train_cfg
    nets = [init_network(n_inputs, k, cfg.base_seed + i, tc.init_scale) for i in range(reps)]
    stack, failed = train_stack(Stack.of(nets), Xs, ts, tc)
    bad = failed >= 0
    if bad.sum() > cfg.max_diverged_frac * reps:
        raise EstimationError(f"{int(bad.sum())} of {reps} networks diverged")
    return stack.take(np.flatnonzero(~bad)).members(), int(bad.sum())


def _assemble(train: TimeSeries, e: np.ndarray, p, q, k, reps, cfg, arima) -> ParnnModel:
    y = train.values
    if q:
        std = Standardizer.fit(y, e)
    else:
        std = Standardizer.fit(y)
    ys, es = std.y(y), std.e(e)
    X, t = _design(ys, es, p, q)
    ensemble, n_bad = _train_ensemble(X, t, p + q, k, reps, cfg)
    fitted = std.y_inv(Stack.of(ensemble).mean_predict(X))
    bc = boxcox_param_for(y, cfg.boxcox_lambda)
    target = y[max(p, q):]
    # keep in-sample predictions inside the transform domain
    floor = -bc.shift + 1e-12
    err = boxcox_values(target, bc) - boxcox_values(np.maximum(fitted, floor), bc)
    sigma = float(np.std(err, ddof=1)) if err.size > 1 else float(abs(err[0]))
    return ParnnModel(
        arima=arima, p=p, q=q, k=k, ensemble=ensemble, standardization=std,
        residual_sigma=max(sigma, np.finfo(np.float64).tiny), boxcox=bc,
        y_history=y.copy(), e_history=np.asarray(e, dtype=np.float64).copy(),
        n_diverged=n_bad,
    )


def fit_fixed(train, p: int, q: int, cfg: ParnnConfig = ParnnConfig(), *,
              arima: ArimaModel | None = None, reps: int | None = None) -> ParnnModel:
    """Two-stage fit at a fixed (p, q).

    ``arima`` may be supplied to reuse a stage-one fit on the same training
    series; ``reps`` overrides ``cfg.reps``.
    """
    train = as_series(train)
    if p < 1 or q < 1:
        raise ValueError("p and q must both be >= 1")
    if len(train) <= max(p, q) + 1:
        raise SizingError(f"PARNN({p},{q}) needs more than {max(p, q) + 1} observations")
    if arima is None:
        arima = auto_arima(train, cfg.arima_max_p, cfg.arima_max_q, cfg.arima_max_d)
    e = arima.residuals.values
    return _assemble(train, e, p, q, hidden_size(p, q), reps or cfg.reps, cfg, arima)


def ar_order_by_aic(train, max_p: int = 10) -> int:
    """Lag order of the least-squares AR proxy minimising AIC on a common sample."""
    y = as_values(train)
    max_p = max(1, min(max_p, y.size // 2 - 1))
    best, best_aic = 1, math.inf
    for p in range(1, max_p + 1):
        rows = np.arange(max_p, y.size)
        X = np.column_stack([np.ones(rows.size)] + [y[rows - i] for i in range(1, p + 1)])
        beta, *_ = np.linalg.lstsq(X, y[rows], rcond=None)
        r = y[rows] - X @ beta
        s2 = max(float(r @ r) / rows.size, np.finfo(np.float64).eps)
        aic = rows.size * math.log(s2) + 2 * (p + 1)
        if aic < best_aic:
            best, best_aic = p, aic
    return best


def fit_arnn(train, cfg: ParnnConfig = ParnnConfig(), p: int | None = None) -> ParnnModel:
    """Plain autoregressive network baseline with (p + 1) / 2 hidden units."""
    train = as_series(train)
    if p is None:
        p = ar_order_by_aic(train, cfg.max_p)
    if len(train) <= p + 1:
        raise SizingError(f"ARNN({p}) needs more than {p + 1} observations")
    k = (p + 2) // 2
    return _assemble(train, np.zeros(len(train)), p, 0, k, cfg.reps, cfg, None)


def extend(model: ParnnModel, new_values) -> ParnnModel:
    """Condition on further observations without retraining.

    ARIMA residuals for the new points come from the stage-one model with
    its coefficients held fixed.
    """
    new = as_values(new_values)
    y = np.concatenate([model.y_history, new])
    if model.arima is not None:
        arima = arima_extend(model.arima, new)
        e = arima.residuals.values
    else:
        arima, e = None, np.zeros(y.size)
    return replace(model, arima=arima, y_history=y, e_history=e)


def roll_forward(model: ParnnModel, h: int, n_paths: int = 1,
                 perturb: Callable[[int, np.ndarray], np.ndarray] | None = None) -> np.ndarray:
    """Iterate the one-step map ``h`` times for ``n_paths`` parallel histories.

    ``perturb(step, point)`` may replace each step's ensemble-mean output (on
    the original scale) before it is fed back. Returns shape (n_paths, h).
    """
    if h < 1:
        raise ValueError("h must be positive")
    std, p, q = model.standardization, model.p, model.q
    ys = np.tile(std.y(model.y_history[-p:]), (n_paths, 1)) if p else np.zeros((n_paths, 0))
    es = np.tile(std.e(model.e_history[-q:]), (n_paths, 1)) if q else np.zeros((n_paths, 0))
    e_future = float(std.e(0.0))
    out = np.empty((n_paths, h))
    for step in range(h):
        X = np.concatenate([ys[:, ::-1], es[:, ::-1]], axis=1)
        point = std.y_inv(model.stack.mean_predict(X))
        if perturb is not None:
            point = perturb(step, point)
        out[:, step] = point
        ys = np.concatenate([ys[:, 1:], std.y(point)[:, None]], axis=1)
        if q:
            es = np.concatenate([es[:, 1:], np.full((n_paths, 1), e_future)], axis=1)
    return out


def forecast_recursive(model: ParnnModel, h: int) -> np.ndarray:
    """Multi-step point forecast: the ensemble mean fed back as history."""
    return roll_forward(model, h)[0]


@dataclass(frozen=True)
class GridResult:
    p: int
    q: int
    table: dict[tuple[int, int], float]

    @property
    def mase(self) -> float:
        return self.table[(self.p, self.q)]


def grid_search(train, validation, cfg: ParnnConfig = ParnnConfig(), *,
                cells=None, scorer: Callable[[int, int], float] | None = None,
                arima: ArimaModel | None = None) -> GridResult:
    """Pick (p, q) by validation MASE over the grid [1, max_p] x [1, max_q].

    Each cell trains ``cfg.search_reps`` networks and forecasts the whole
    validation segment recursively. Ties go to the smaller p + q, then the
    smaller p. ``scorer`` replaces fitting and scoring (for tests).
    """
    train, validation = as_series(train), as_series(validation)
    if len(validation) < 1:
        raise SizingError("validation segment is empty")
    if cells is None:
        cells = [(p, q) for p in range(1, cfg.max_p + 1) for q in range(1, cfg.max_q + 1)]
    if scorer is None:
        if arima is None:
            arima = auto_arima(train, cfg.arima_max_p, cfg.arima_max_q, cfg.arima_max_d)

        def scorer(p, q):
            m = fit_fixed(train, p, q, cfg, arima=arima, reps=cfg.search_reps)
            pred = forecast_recursive(m, len(validation))
            return metrics.mase(train, validation, pred, train.seasonal_period)

    table = {}
    for p, q in cells:
        if len(train) - max(p, q) < 2:
            continue
        try:
            score = float(scorer(p, q))
        except (EstimationError, SizingError, UndefinedMetricError) as exc:
            log.debug("grid cell (%d,%d) skipped: %s", p, q, exc)
            continue
        if math.isfinite(score):
            table[(p, q)] = score
    if not table:
        raise SearchError("no feasible (p, q) cell in the grid")
    p, q = min(table, key=lambda c: (table[c], c[0] + c[1], c[0]))
    return GridResult(p, q, table)


def fit_parnn(train, validation, cfg: ParnnConfig = ParnnConfig(), *,
              refit: bool = True, cells=None):
    """Grid-search (p, q) on the validation split, then fit the full ensemble.

    With ``refit`` the final model is trained on train + validation;
    otherwise it is trained on train alone and conditioned on the
    validation observations. Returns (model, grid result).
    """
    train, validation = as_series(train), as_series(validation)
    stage1 = auto_arima(train, cfg.arima_max_p, cfg.arima_max_q, cfg.arima_max_d)
    grid = grid_search(train, validation, cfg, cells=cells, arima=stage1)
    if refit:
        model = fit_fixed(train.concat(validation), grid.p, grid.q, cfg)
    else:
        model = extend(fit_fixed(train, grid.p, grid.q, cfg, arima=stage1), validation)
    return replace(model, validation_mase=grid.mase), grid
