"""Series container, chronological splitting, Box-Cox transforms and lag embedding."""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, replace

import numpy as np

from .errors import DomainError, SizingError


class Frequency(str, enum.Enum):
    DAILY = "daily"
    WEEKLY = "weekly"
    MONTHLY = "monthly"
    QUARTERLY = "quarterly"


class Term(str, enum.Enum):
    SHORT = "short"
    MEDIUM = "medium"
    LONG = "long"


@dataclass(frozen=True, eq=False)
class TimeSeries:
    """Ordered real-valued observations.

    ``values`` is stored as a read-only float64 copy, so instances can be
    shared freely.
    """

    values: np.ndarray
    frequency: Frequency = Frequency.DAILY
    seasonal_period: int = 1
    origin_index: int = 0

    def __post_init__(self):
        v = np.array(self.values, dtype=np.float64).reshape(-1)
        if v.size < 1:
            raise SizingError("a series needs at least one observation")
        if not np.all(np.isfinite(v)):
            raise DomainError("series contains missing or non-finite values")
        if self.seasonal_period < 1:
            raise ValueError("seasonal_period must be >= 1")
        v.setflags(write=False)
        object.__setattr__(self, "values", v)
        object.__setattr__(self, "frequency", Frequency(self.frequency))

    def __len__(self):
        return self.values.size

    def __array__(self, dtype=None, copy=None):
        return np.asarray(self.values, dtype=dtype)

    def with_values(self, values, origin_index=None) -> "TimeSeries":
        """Same metadata, new observations."""
        if origin_index is None:
            origin_index = self.origin_index
        return replace(self, values=values, origin_index=origin_index)

    def slice(self, start, stop=None) -> "TimeSeries":
        n = len(self)
        start, stop, _ = slice(start, stop).indices(n)
        return self.with_values(self.values[start:stop], self.origin_index + start)

    def concat(self, other: "TimeSeries") -> "TimeSeries":
        return self.with_values(np.concatenate([self.values, other.values]))


def as_values(x) -> np.ndarray:
    """Float64 view of a TimeSeries or array-like."""
    if isinstance(x, TimeSeries):
        return x.values
    return np.asarray(x, dtype=np.float64).reshape(-1)


def as_series(x, **meta) -> TimeSeries:
    if isinstance(x, TimeSeries):
        return x
    return TimeSeries(np.asarray(x, dtype=np.float64), **meta)


@dataclass(frozen=True)
class ChronoSplit:
    train: TimeSeries
    validation: TimeSeries
    test: TimeSeries

    @property
    def train_validation(self) -> TimeSeries:
        return self.train.concat(self.validation)


def chronological_split(series: TimeSeries, test_len: int) -> ChronoSplit:
    """Split into train / validation / test with validation twice the test length."""
    if test_len < 1:
        raise ValueError("test_len must be positive")
    n = len(series)
    need = 3 * test_len + 1
    if n < need:
        raise SizingError(
            f"series of length {n} too short for test_len={test_len}; "
            f"need at least {need} observations"
        )
    val_start = n - 3 * test_len
    test_start = n - test_len
    return ChronoSplit(
        train=series.slice(0, val_start),
        validation=series.slice(val_start, test_start),
        test=series.slice(test_start, n),
    )


_FIXED_HORIZONS = {
    Frequency.WEEKLY: (13, 26, 52),
    Frequency.MONTHLY: (6, 12, 24),
    Frequency.QUARTERLY: (4, 8, 12),
}
_DAILY_PERCENT = (5, 10, 20)
_TERM_INDEX = {Term.SHORT: 0, Term.MEDIUM: 1, Term.LONG: 2}


def horizon_for(frequency, term, series_len: int) -> int:
    """Forecast horizon for a frequency/term pair.

    Daily horizons are a percentage of the series length, rounded up so the
    test segment is never empty.
    """
    frequency = Frequency(frequency)
    i = _TERM_INDEX[Term(term)]
    if frequency is Frequency.DAILY:
        if series_len < 1:
            raise ValueError("series_len must be positive")
        # integer ceiling avoids float noise in e.g. 5% of 500
        return -(-series_len * _DAILY_PERCENT[i] // 100)
    return _FIXED_HORIZONS[frequency][i]


@dataclass(frozen=True)
class BoxCoxParam:
    lam: float = 0.5
    shift: float = 0.0

    def __post_init__(self):
        if not math.isfinite(self.lam):
            raise ValueError("Box-Cox lambda must be finite")
        if self.shift < 0 or not math.isfinite(self.shift):
            raise ValueError("Box-Cox shift must be a nonnegative finite number")


def boxcox_param_for(values, lam: float = 0.5) -> BoxCoxParam:
    """Shift 0 for positive data, otherwise ``1 - min`` so every value is >= 1."""
    lo = float(np.min(as_values(values)))
    shift = 0.0 if lo > 0 else 1.0 - lo
    return BoxCoxParam(lam=lam, shift=shift)


def boxcox_values(y, param: BoxCoxParam) -> np.ndarray:
    x = np.asarray(y, dtype=np.float64) + param.shift
    if np.any(x <= 0):
        raise DomainError("Box-Cox needs strictly positive shifted values")
    if param.lam == 0:
        return np.log(x)
    return (x ** param.lam - 1.0) / param.lam


def boxcox_inverse_values(z, param: BoxCoxParam) -> np.ndarray:
    z = np.asarray(z, dtype=np.float64)
    if param.lam == 0:
        return np.exp(z) - param.shift
    base = param.lam * z + 1.0
    if np.any(base <= 0):
        raise DomainError("inverse Box-Cox needs lambda*z + 1 > 0")
    return base ** (1.0 / param.lam) - param.shift


def boxcox_transform(series: TimeSeries, param: BoxCoxParam) -> TimeSeries:
    return series.with_values(boxcox_values(series.values, param))


def boxcox_inverse(series: TimeSeries, param: BoxCoxParam) -> TimeSeries:
    return series.with_values(boxcox_inverse_values(series.values, param))


def lag_embed(series, p: int):
    """Rows ``(y[t-1], ..., y[t-p])`` with target ``y[t]`` for t = p..n-1."""
    y = as_values(series)
    if p < 1:
        raise ValueError("p must be positive")
    n = y.size
    if n <= p:
        raise SizingError(f"lag embedding of order {p} needs more than {p} values, got {n}")
    X = np.column_stack([y[p - i: n - i] for i in range(1, p + 1)])
    return X, y[p:].copy()
