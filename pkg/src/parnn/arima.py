"""Non-seasonal ARIMA(p, d, q) by conditional sum of squares.

The linear stage of the hybrid: KPSS-driven differencing, CSS estimation,
AIC stepwise order search, in-sample residuals on the original scale and
recursive point forecasts.

The model on the d-times differenced series ``w`` is::

    w[t] = c + sum_i ar[i] * w[t-i] + sum_j ma[j] * eps[t-j] + eps[t]
"""

from __future__ import annotations

import itertools
import logging
import math
from dataclasses import dataclass

import numpy as np
from scipy import optimize, signal

from .errors import EstimationError, SizingError
from .series import TimeSeries, as_series, as_values

log = logging.getLogger(__name__)

KPSS_CRITICAL_5PCT = 0.463
# order search discards fits with an AR or MA root this close to the unit circle
ROOT_MARGIN = 1.01
# ... and fits whose AR and MA polynomials share a near-common root
COMMON_ROOT_DIST = 0.1
_EPS = np.finfo(np.float64).eps


@dataclass(frozen=True)
class ArimaOrder:
    p: int
    d: int
    q: int

    def __post_init__(self):
        if min(self.p, self.d, self.q) < 0:
            raise ValueError(f"ARIMA orders must be nonnegative, got {self}")

    def __iter__(self):
        return iter((self.p, self.d, self.q))

    def __str__(self):
        return f"({self.p},{self.d},{self.q})"


@dataclass(frozen=True, eq=False)
class ArimaModel:
    order: ArimaOrder
    ar_coeffs: np.ndarray
    ma_coeffs: np.ndarray
    intercept: float
    sigma2: float
    aic: float
    residuals: TimeSeries
    fitted: TimeSeries
    history: TimeSeries
    n_cond: int
    n_eff: int
    css: float
    converged: bool = True
    ma_invertible: bool = True

    @property
    def params(self) -> np.ndarray:
        return np.concatenate([[self.intercept], self.ar_coeffs, self.ma_coeffs])


@dataclass(frozen=True)
class KpssResult:
    statistic: float
    reject_at_5pct: bool
    lags: int


def aic_value(sigma2: float, n_eff: int, order: ArimaOrder) -> float:
    return n_eff * math.log(sigma2) + 2.0 * (order.p + order.q + 1)


def difference(series, d: int) -> TimeSeries:
    """Apply ``d`` rounds of first differencing."""
    s = as_series(series)
    if d < 0:
        raise ValueError("d must be nonnegative")
    if len(s) <= d:
        raise SizingError(f"differencing of order {d} needs more than {d} values, got {len(s)}")
    if d == 0:
        return s
    return s.with_values(np.diff(s.values, n=d), s.origin_index + d)


def difference_heads(values, d: int) -> np.ndarray:
    """First element of the series at each differencing level 0..d-1."""
    v = as_values(values)
    heads = []
    for _ in range(d):
        heads.append(v[0])
        v = np.diff(v)
    return np.array(heads)


def undifference(diffed, heads) -> np.ndarray:
    """Invert :func:`difference` given the stored level heads."""
    v = as_values(diffed)
    for h in reversed(np.asarray(heads, dtype=np.float64)):
        v = np.concatenate([[h], h + np.cumsum(v)])
    return v


def kpss_level_stat(series) -> KpssResult:
    """KPSS level-stationarity statistic with a Bartlett-kernel long-run variance."""
    y = as_values(series)
    n = y.size
    if n < 10:
        raise SizingError(f"KPSS needs at least 10 observations, got {n}")
    lags = int(math.floor(4.0 * (n / 100.0) ** 0.25))
    if np.ptp(y) == 0:
        return KpssResult(0.0, False, lags)
    e = y - y.mean()
    s = np.cumsum(e)
    lrv = e @ e / n
    for j in range(1, lags + 1):
        lrv += 2.0 * (1.0 - j / (lags + 1.0)) * (e[j:] @ e[:-j]) / n
    stat = float(s @ s / (n * n * lrv))
    return KpssResult(stat, stat > KPSS_CRITICAL_5PCT, lags)


def _css_residuals(w: np.ndarray, params: np.ndarray, p: int, q: int) -> np.ndarray:
    c = params[0]
    ar = params[1:1 + p]
    ma = params[1 + p:1 + p + q]
    n = w.size
    u = w[p:] - c
    for i in range(1, p + 1):
        u = u - ar[i - 1] * w[p - i:n - i]
    eps = np.zeros(n)
    if q:
        eps[p:] = signal.lfilter([1.0], np.concatenate([[1.0], ma]), u)
    else:
        eps[p:] = u
    return eps


def _min_root(coeffs: np.ndarray) -> float:
    """Smallest root modulus of ``1 + c1 z + ... + cm z^m`` (inf if constant)."""
    nz = np.flatnonzero(np.abs(coeffs) > 1e-8)
    if nz.size == 0:
        return math.inf
    c = coeffs[:nz[-1] + 1]
    return float(np.min(np.abs(np.roots(np.concatenate([c[::-1], [1.0]])))))


def _ma_invertible(ma: np.ndarray) -> bool:
    return _min_root(ma) > 1.0


def min_root_modulus(model: ArimaModel) -> float:
    """Smallest modulus over the AR and MA polynomial roots."""
    return min(_min_root(-model.ar_coeffs), _min_root(model.ma_coeffs))


def common_root_distance(model: ArimaModel) -> float:
    """Closest distance between an AR root and an MA root (inf without both parts)."""
    ar, ma = -model.ar_coeffs, model.ma_coeffs
    if not (np.any(ar) and np.any(ma)):
        return math.inf
    ra = np.roots(np.concatenate([ar[::-1], [1.0]]))
    rm = np.roots(np.concatenate([ma[::-1], [1.0]]))
    return float(np.min(np.abs(ra[:, None] - rm[None, :])))


def admissible(model: ArimaModel) -> bool:
    """Order-search filter: roots off the unit circle and no common AR/MA factor."""
    return (min_root_modulus(model) >= ROOT_MARGIN
            and common_root_distance(model) >= COMMON_ROOT_DIST)


def _ols_init(w: np.ndarray, p: int, n_cond: int) -> np.ndarray:
    """Least-squares intercept and AR terms on rows t >= n_cond."""
    rows = np.arange(n_cond, w.size)
    X = np.column_stack([np.ones(rows.size)] + [w[rows - i] for i in range(1, p + 1)])
    beta, *_ = np.linalg.lstsq(X, w[rows], rcond=None)
    return beta


def _build(history, order, params, n_cond, *, converged=True) -> ArimaModel:
    y = as_values(history)
    p, d, q = order
    w = np.diff(y, n=d) if d else y
    eps = _css_residuals(w, params, p, q)
    used = eps[n_cond:]
    css = float(used @ used)
    n_eff = used.size
    sigma2 = max(css / n_eff, _EPS)
    resid = np.zeros(y.size)
    resid[d:] = eps
    ma = np.array(params[1 + p:1 + p + q], dtype=np.float64)
    hist = as_series(history)
    return ArimaModel(
        order=order,
        ar_coeffs=np.array(params[1:1 + p], dtype=np.float64),
        ma_coeffs=ma,
        intercept=float(params[0]),
        sigma2=sigma2,
        aic=aic_value(sigma2, n_eff, order),
        residuals=hist.with_values(resid),
        fitted=hist.with_values(y - resid),
        history=hist,
        n_cond=n_cond,
        n_eff=n_eff,
        css=css,
        converged=converged,
        ma_invertible=_ma_invertible(ma),
    )


def arima_from_params(history, order: ArimaOrder, intercept=0.0, ar=(), ma=(),
                      n_cond: int | None = None) -> ArimaModel:
    """Assemble a model with fixed coefficients, computing residuals on ``history``."""
    order = ArimaOrder(*order)
    ar = np.asarray(ar, dtype=np.float64).reshape(-1)
    ma = np.asarray(ma, dtype=np.float64).reshape(-1)
    if ar.size != order.p or ma.size != order.q:
        raise ValueError("coefficient counts do not match the order")
    if n_cond is None:
        n_cond = max(order.p, order.q)
    params = np.concatenate([[intercept], ar, ma])
    return _build(history, order, params, n_cond)


def arima_extend(model: ArimaModel, new_values) -> ArimaModel:
    """Append observations to the history, keeping the estimated coefficients."""
    y = np.concatenate([model.history.values, as_values(new_values)])
    m = _build(model.history.with_values(y), model.order, model.params, model.n_cond,
               converged=model.converged)
    return m


def fit_arima(train, order, *, n_cond: int | None = None, max_iter: int | None = None,
              tol: float = 1e-8, restarts: int = 3) -> ArimaModel:
    """Estimate ARIMA coefficients by conditional sum of squares.

    Pure AR models are linear in their parameters and solved exactly by
    least squares. With MA terms the objective is minimised by Nelder-Mead
    from a least-squares start, restarting from the incumbent until the
    relative improvement drops below ``tol``.

    ``n_cond`` is the number of leading differenced observations whose
    innovations are excluded from the objective; it defaults to
    ``max(p, q)``. Order search passes a shared value so AIC values are
    computed over the same sample.
    """
    order = ArimaOrder(*order)
    train = as_series(train)
    y = train.values
    p, d, q = order
    if n_cond is None:
        n_cond = max(p, q)
    if n_cond < max(p, q):
        raise ValueError("n_cond must be at least max(p, q)")
    if y.size <= d + n_cond + 1:
        raise SizingError(
            f"ARIMA{order} needs more than {d + n_cond + 1} observations, got {y.size}"
        )

    if np.ptp(y) == 0:
        # degenerate constant series: nothing to estimate
        m = arima_from_params(train, ArimaOrder(0, d, 0), y[0] if d == 0 else 0.0,
                              n_cond=n_cond)
        return m

    w = np.diff(y, n=d) if d else y
    beta = _ols_init(w, p, n_cond)
    x0 = np.concatenate([beta, np.zeros(q)])
    if q == 0:
        return _build(train, order, x0, n_cond)

    def objective(theta):
        with np.errstate(over="ignore", invalid="ignore"):
            e = _css_residuals(w, theta, p, q)[n_cond:]
            val = e @ e
        return val if np.isfinite(val) else np.inf

    f0 = objective(x0)
    scale = float(np.std(w)) or 1.0
    steps = np.concatenate([[0.1 * scale], np.full(p + q, 0.1)])
    cap = 500 * (p + q + 1)
    if max_iter is not None:
        cap = max_iter
    best_x, best_f = x0, f0
    converged = False
    for _ in range(restarts + 1):
        simplex = np.vstack([best_x] + [best_x + np.eye(best_x.size)[i] * steps[i]
                                        for i in range(best_x.size)])
        res = optimize.minimize(
            objective, best_x, method="Nelder-Mead",
            options={"maxiter": cap, "maxfev": 4 * cap, "initial_simplex": simplex,
                     "xatol": np.inf, "fatol": tol * max(best_f, _EPS)},
        )
        improved = res.fun < best_f
        rel = (best_f - res.fun) / max(best_f, _EPS) if improved else 0.0
        if improved:
            best_x, best_f = res.x, res.fun
        if res.success and rel <= tol:
            converged = True
            break
    if not converged:
        raise EstimationError(
            f"ARIMA{order} optimiser did not converge within {cap} iterations",
            best_params=best_x,
        )
    m = _build(train, order, best_x, n_cond, converged=True)
    if not m.ma_invertible:
        log.debug("ARIMA%s fitted with non-invertible MA polynomial", order)
    return m


def select_d(train, max_d: int) -> int:
    """Smallest d in [0, max_d] whose differenced series passes KPSS."""
    y = as_values(train)
    for d in range(max_d + 1):
        w = np.diff(y, n=d) if d else y
        if w.size < 10:
            return max(d - 1, 0)
        if not kpss_level_stat(w).reject_at_5pct:
            return d
    return max_d


def auto_arima(train, max_p: int = 5, max_q: int = 5, max_d: int = 2, *,
               stepwise: bool = True) -> ArimaModel:
    """KPSS differencing then AIC-minimising search over (p, q).

    Candidates failing :func:`admissible` are never selected. The stepwise
    search starts from the best of (2,2), (0,0), (1,0), (0,1),
    then moves to any better neighbour with p and/or q changed by one, until
    no neighbour improves the AIC. ``stepwise=False`` scores every cell.
    """
    train = as_series(train)
    d = select_d(train, max_d)
    avail = len(train) - d - 2
    max_p = max(0, min(max_p, avail))
    max_q = max(0, min(max_q, avail))
    n_cond = max(max_p, max_q)
    cache: dict[tuple[int, int], ArimaModel | None] = {}

    def score(p, q):
        if (p, q) not in cache:
            try:
                cache[(p, q)] = fit_arima(train, ArimaOrder(p, d, q), n_cond=n_cond)
            except (EstimationError, SizingError) as exc:
                log.debug("skipping ARIMA(%d,%d,%d): %s", p, d, q, exc)
                cache[(p, q)] = None
        m = cache[(p, q)]
        if m is None or not admissible(m):
            return math.inf
        return m.aic

    def inside(p, q):
        return 0 <= p <= max_p and 0 <= q <= max_q

    if not stepwise:
        for p, q in itertools.product(range(max_p + 1), range(max_q + 1)):
            score(p, q)
    else:
        starts = [(min(2, max_p), min(2, max_q)), (0, 0), (min(1, max_p), 0), (0, min(1, max_q))]
        current = min(dict.fromkeys(starts), key=lambda c: (score(*c), c[0] + c[1]))
        while True:
            moves = [(current[0] + dp, current[1] + dq)
                     for dp, dq in itertools.product((-1, 0, 1), repeat=2) if dp or dq]
            moves = [m for m in moves if inside(*m)]
            best = min(moves, key=lambda c: (score(*c), c[0] + c[1]), default=None)
            if best is None or score(*best) >= score(*current):
                break
            current = best

    fitted = {k: v for k, v in cache.items() if v is not None and math.isfinite(score(*k))}
    if not fitted:
        raise EstimationError(f"no admissible ARIMA candidate could be fitted with d={d}")
    key = min(fitted, key=lambda c: (fitted[c].aic, c[0] + c[1], c[0]))
    return fitted[key]


def arima_forecast(model: ArimaModel, h: int) -> np.ndarray:
    """Recursive point forecasts with future innovations set to zero."""
    if h < 1:
        raise ValueError("h must be positive")
    p, d, q = model.order
    y = model.history.values
    levels = [y]
    for _ in range(d):
        levels.append(np.diff(levels[-1]))
    w = list(levels[-1][-p:]) if p else []
    eps = list(model.residuals.values[-q:]) if q else []
    out = np.empty(h)
    for step in range(h):
        val = model.intercept
        for i in range(1, p + 1):
            val += model.ar_coeffs[i - 1] * w[-i]
        for j in range(1, q + 1):
            val += model.ma_coeffs[j - 1] * eps[-j]
        out[step] = val
        if p:
            w.append(val)
        if q:
            eps.append(0.0)
    for lvl in reversed(levels[:-1]):
        out = lvl[-1] + np.cumsum(out)
    return out
