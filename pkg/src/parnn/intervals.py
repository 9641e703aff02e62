"""Simulated prediction intervals.

Future sample paths are generated by iterating the fitted network and
adding Gaussian noise on the Box-Cox scale, where the one-step errors are
taken to be homoscedastic. Bounds are empirical percentiles of the paths.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .model import ParnnModel, forecast_recursive, roll_forward
from .series import boxcox_inverse_values, boxcox_values


@dataclass(frozen=True)
class SimulationConfig:
    n_paths: int = 1000
    level: float = 0.80
    seed: int = 0

    def __post_init__(self):
        if self.n_paths < 2:
            raise ValueError("n_paths must be >= 2")
        if not 0 < self.level < 1:
            raise ValueError("level must lie in (0, 1)")


@dataclass(frozen=True, eq=False)
class PathSimulation:
    paths: np.ndarray  # (n_paths, h)
    n_clamped: int  # paths that hit the inverse-transform boundary at least once


@dataclass(frozen=True, eq=False)
class IntervalForecast:
    horizon: int
    point: np.ndarray
    lower: np.ndarray
    upper: np.ndarray
    level: float


def simulate_paths(model: ParnnModel, h: int, cfg: SimulationConfig = SimulationConfig()) -> PathSimulation:
    rng = np.random.default_rng(cfg.seed)
    noise = rng.standard_normal((cfg.n_paths, h)) * model.residual_sigma
    bc = model.boxcox
    clamped = np.zeros(cfg.n_paths, dtype=bool)
    floor = -bc.shift + 1e-12
    boundary = -1.0 / bc.lam if bc.lam > 0 else -np.inf

    def perturb(step, point):
        z = boxcox_values(np.maximum(point, floor), bc) + noise[:, step]
        hit = z <= boundary
        clamped[hit] = True
        return boxcox_inverse_values(np.where(hit, np.nextafter(boundary, np.inf), z), bc)

    paths = roll_forward(model, h, cfg.n_paths, perturb)
    return PathSimulation(paths, int(clamped.sum()))


def percentile_interval(paths, level: float):
    """Per-step (lower, upper) empirical quantiles, linear interpolation between order statistics."""
    paths = np.asarray(paths, dtype=np.float64)
    if paths.ndim == 1:
        paths = paths[:, None]
    if paths.shape[0] < 2:
        raise ValueError("need at least two paths")
    lo = np.quantile(paths, (1.0 - level) / 2.0, axis=0, method="linear")
    hi = np.quantile(paths, (1.0 + level) / 2.0, axis=0, method="linear")
    return lo, hi


def forecast_interval(model: ParnnModel, h: int, cfg: SimulationConfig = SimulationConfig()) -> IntervalForecast:
    sim = simulate_paths(model, h, cfg)
    lo, hi = percentile_interval(sim.paths, cfg.level)
    return IntervalForecast(h, forecast_recursive(model, h), lo, hi, cfg.level)
