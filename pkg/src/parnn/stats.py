"""Rank-based model comparison: Friedman test and multiple comparisons with the best."""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy import integrate, optimize
from scipy import stats as sps


@dataclass(frozen=True, eq=False)
class ScoreTable:
    """Accuracy scores, models in rows and datasets in columns; lower is better."""

    model_names: list[str]
    dataset_names: list[str]
    scores: np.ndarray

    def __post_init__(self):
        s = np.asarray(self.scores, dtype=np.float64)
        if s.shape != (len(self.model_names), len(self.dataset_names)):
            raise ValueError("score matrix shape does not match the name lists")
        if s.shape[0] < 2 or s.shape[1] < 2:
            raise ValueError("need at least two models and two datasets")
        if not np.all(np.isfinite(s)):
            raise ValueError("scores must be finite")
        object.__setattr__(self, "scores", s)


@dataclass(frozen=True, eq=False)
class RankMatrix:
    model_names: list[str]
    dataset_names: list[str]
    ranks: np.ndarray  # (models, datasets)

    @property
    def avg_ranks(self) -> np.ndarray:
        return self.ranks.mean(axis=1)

    @property
    def n_models(self) -> int:
        return self.ranks.shape[0]

    @property
    def n_datasets(self) -> int:
        return self.ranks.shape[1]


def rank_scores(table: ScoreTable) -> RankMatrix:
    """Rank 1 is the smallest score in each column; ties share the average rank."""
    ranks = sps.rankdata(table.scores, method="average", axis=0)
    return RankMatrix(list(table.model_names), list(table.dataset_names), ranks)


@dataclass(frozen=True)
class FriedmanResult:
    chi2_f: float
    f_f: float
    df1: int
    df2: int
    critical_value: float
    reject_at_5pct: bool


def f_critical(df1: int, df2: int, alpha: float = 0.05) -> float:
    return float(sps.f.ppf(1.0 - alpha, df1, df2))


def friedman_test(rm: RankMatrix, alpha: float = 0.05) -> FriedmanResult:
    """Friedman chi-square on average ranks and its F-distributed modification."""
    kappa, zeta = rm.n_models, rm.n_datasets
    if kappa < 3:
        raise ValueError("the F approximation needs at least three models")
    R = rm.avg_ranks
    chi2 = 12.0 * zeta / (kappa * (kappa + 1)) * (np.sum(R ** 2) - kappa * (kappa + 1) ** 2 / 4.0)
    # rank-sum identity makes chi2 exactly zero when all average ranks coincide
    if np.allclose(R, R[0], rtol=0, atol=1e-12):
        chi2 = 0.0
    df1, df2 = kappa - 1, (kappa - 1) * (zeta - 1)
    denom = zeta * (kappa - 1) - chi2
    ff = math.inf if denom <= 1e-12 * zeta * kappa else (zeta - 1) * chi2 / denom
    crit = f_critical(df1, df2, alpha)
    return FriedmanResult(float(chi2), float(ff), df1, df2, crit, bool(ff > crit))


def _range_cdf(w: float, kappa: int) -> float:
    """P(max - min <= w) for kappa independent standard normals."""
    if w <= 0:
        return 0.0

    def integrand(x):
        return sps.norm.pdf(x) * (sps.norm.cdf(x + w) - sps.norm.cdf(x)) ** (kappa - 1)

    val, _ = integrate.quad(integrand, -np.inf, np.inf, epsabs=1e-12, epsrel=1e-10, limit=200)
    return kappa * val


@lru_cache(maxsize=None)
def normal_range_quantile(alpha: float, kappa: int) -> float:
    """Upper-alpha quantile of the range of ``kappa`` standard normals."""
    if kappa < 2:
        raise ValueError("range needs at least two variables")
    return float(optimize.brentq(lambda w: _range_cdf(w, kappa) - (1.0 - alpha), 1e-6, 20.0,
                                 xtol=1e-10))


@dataclass(frozen=True)
class McbRow:
    model: str
    avg_rank: float
    half_width: float
    lower: float
    upper: float
    significantly_worse_than_best: bool


def mcb_intervals(rm: RankMatrix, alpha: float = 0.05) -> list[McbRow]:
    """Rank intervals; a model is worse than the best when its interval lies wholly above."""
    if not 0 < alpha < 1:
        raise ValueError("alpha must lie in (0, 1)")
    kappa, zeta = rm.n_models, rm.n_datasets
    hw = 0.5 * normal_range_quantile(alpha, kappa) * math.sqrt(kappa * (kappa + 1) / (6.0 * zeta))
    R = rm.avg_ranks
    reference = R.min() + hw
    return [McbRow(name, float(r), hw, float(r - hw), float(r + hw), bool(r - hw > reference))
            for name, r in zip(rm.model_names, R)]
