"""Simulation checks for the PARNN(1, k, 1) state-space process.

The state is ``x_t = (y_t, eps_t)`` with

    y_t = psi1*y_{t-1} + psi2*e_{t-1} + nu
          + sum_i beta_i * G(phi1_i*y_{t-1} + phi2_i*e_{t-1} + mu_i) + eps_t

and ``e_t = eps_t``. Geometric ergodicity holds when |psi1| < 1. The
coupling diagnostic runs two chains on one noise stream; when the map is a
contraction their gap shrinks geometrically. A failed coupling is not
evidence against ergodicity, only the absence of a certificate.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, replace
from pathlib import Path

import numpy as np
from scipy.special import expit

EXPLOSION = 1e300
MEET_TOL = 1e-8
MEET_HOLD = 100


@dataclass(frozen=True, eq=False)
class Parnn11Weights:
    psi1: float = 0.0
    psi2: float = 0.0
    nu: float = 0.0
    betas: np.ndarray = np.zeros(1)
    phis1: np.ndarray = np.zeros(1)
    phis2: np.ndarray = np.zeros(1)
    mus: np.ndarray = np.zeros(1)

    def __post_init__(self):
        arrs = [np.asarray(a, dtype=np.float64).reshape(-1)
                for a in (self.betas, self.phis1, self.phis2, self.mus)]
        if len({a.size for a in arrs}) != 1 or arrs[0].size < 1:
            raise ValueError("betas, phis1, phis2 and mus must share one length k >= 1")
        for name, a in zip(("betas", "phis1", "phis2", "mus"), arrs):
            object.__setattr__(self, name, a)
        vals = np.concatenate(arrs + [[self.psi1, self.psi2, self.nu]])
        if not np.all(np.isfinite(vals)):
            raise ValueError("weights must be finite")

    @property
    def k(self) -> int:
        return self.betas.size

    def nonlinear(self, y_prev, e_prev):
        y_prev = np.asarray(y_prev, dtype=np.float64)
        e_prev = np.asarray(e_prev, dtype=np.float64)
        z = np.multiply.outer(y_prev, self.phis1) + np.multiply.outer(e_prev, self.phis2) + self.mus
        return expit(z) @ self.betas

    def lipschitz_y(self) -> float:
        """Bound on |d y_t / d y_{t-1}| over all states."""
        return abs(self.psi1) + 0.25 * float(np.abs(self.betas * self.phis1).sum())


def step(w: Parnn11Weights, y_prev, e_prev, eps):
    """One transition; returns (y, e) with e equal to the new innovation."""
    y = w.psi1 * y_prev + w.psi2 * e_prev + w.nu + w.nonlinear(y_prev, e_prev) + eps
    return y, eps


@dataclass(frozen=True, eq=False)
class StateTrajectory:
    states: np.ndarray  # (T, 2) rows (y_t, e_t); row 0 is the initial state
    noise_seed: int | None
    weights: Parnn11Weights
    exploded: bool = False

    @property
    def y(self) -> np.ndarray:
        return self.states[:, 0]


def _innovations(n, seed, innovations):
    if innovations is not None:
        eps = np.asarray(innovations, dtype=np.float64).reshape(-1)
        if eps.size < n:
            raise ValueError(f"need {n} innovations, got {eps.size}")
        return eps[:n]
    return np.random.default_rng(seed).standard_normal(n)


def _run(w, n, eps, y0s):
    """Iterate chains sharing ``eps`` from each initial y; stops at explosion."""
    y0s = np.asarray(y0s, dtype=np.float64)
    out = np.empty((n + 1, y0s.size, 2))
    out[0, :, 0] = y0s
    out[0, :, 1] = 0.0
    y, e = y0s.copy(), np.zeros_like(y0s)
    last = n
    with np.errstate(over="ignore", invalid="ignore"):
        for t in range(1, n + 1):
            y, e = step(w, y, e, np.full_like(y0s, eps[t - 1]))
            out[t, :, 0] = y
            out[t, :, 1] = e
            if not np.all(np.abs(y) <= EXPLOSION):
                last = t - 1
                break
    return out[:last + 1], last < n


def simulate(w: Parnn11Weights, n: int, seed: int | None = 0, y0: float = 0.0, *,
             innovations=None) -> StateTrajectory:
    """Generate ``n`` transitions from ``(y0, 0)`` with standard Gaussian noise.

    ``innovations`` overrides the generator (e.g. zeros for a noiseless run).
    On explosion the trajectory is truncated at the last state within bounds.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    eps = _innovations(n, seed, innovations)
    states, exploded = _run(w, n, eps, [y0])
    return StateTrajectory(states[:, 0, :], None if innovations is not None else seed, w, exploded)


@dataclass(frozen=True, eq=False)
class CouplingResult:
    converged: bool
    first_meeting_index: int | None
    gap_series: np.ndarray
    decay_rate: float | None
    exploded: bool


def _decay_rate(gap: np.ndarray) -> float | None:
    """Least-squares slope of log gap against t while the gap is resolvable."""
    hit = np.flatnonzero(gap <= MEET_TOL)
    idx = np.arange(hit[0] if hit.size else gap.size)
    if idx.size < 2:
        return None
    return float(np.polyfit(idx.astype(np.float64), np.log(gap[idx]), 1)[0])


def coupling_diagnostic(w: Parnn11Weights, n: int, seed: int | None = 0, y0_a: float = 0.0,
                        y0_b: float = 10.0, *, innovations=None) -> CouplingResult:
    if y0_a == y0_b:
        raise ValueError("coupling needs distinct initial states")
    eps = _innovations(n, seed, innovations)
    states, exploded = _run(w, n, eps, [y0_a, y0_b])
    gap = np.abs(states[:, 0, 0] - states[:, 1, 0])
    below = gap < MEET_TOL
    meet = None
    if below[-1]:
        above = np.flatnonzero(~below)
        meet = 0 if above.size == 0 else int(above[-1] + 1)
    converged = meet is not None and not exploded and (gap.size - 1 - meet) >= MEET_HOLD
    return CouplingResult(converged, meet, gap, _decay_rate(gap), exploded)


@dataclass(frozen=True)
class SweepRow:
    psi1: float
    seed: int
    converged: bool
    explosion: bool
    decay_rate: float
    mean: float
    variance: float


@dataclass(frozen=True)
class SweepSummary:
    psi1: float
    converged_fraction: float
    explosion_fraction: float
    mean: float
    variance: float
    contraction_certified: bool


def stationarity_sweep(template: Parnn11Weights, psi1_grid, n: int = 2000, reps: int = 10,
                       seed: int = 0, y0_a: float = 0.0, y0_b: float = 10.0):
    """Coupling and second-half moments for each psi1, ``reps`` seeds per grid point.

    Returns (rows, summaries). ``contraction_certified`` reports whether the
    Lipschitz bound in y is below one, i.e. whether the coupling test is
    expected to succeed for every seed.
    """
    psi1_grid = [float(v) for v in psi1_grid]
    if not psi1_grid:
        raise ValueError("psi1 grid is empty")
    rows, summaries = [], []
    for psi1 in psi1_grid:
        w = replace(template, psi1=psi1)
        block = []
        for r in range(reps):
            s = seed + r
            res = coupling_diagnostic(w, n, s, y0_a, y0_b)
            traj = simulate(w, n, s, y0_a)
            y = traj.y
            tail = y[y.size // 2:] if not traj.exploded else np.array([])
            # near-explosive runs can overflow the moments; they report inf
            with np.errstate(over="ignore", invalid="ignore"):
                mean = float(tail.mean()) if tail.size else math.nan
                var = float(tail.var(ddof=1)) if tail.size > 1 else math.nan
            block.append(SweepRow(psi1, s, res.converged, traj.exploded or res.exploded,
                                  math.nan if res.decay_rate is None else res.decay_rate, mean, var))
        rows.extend(block)
        means = [b.mean for b in block if math.isfinite(b.mean)]
        vars_ = [b.variance for b in block if math.isfinite(b.variance)]
        summaries.append(SweepSummary(
            psi1,
            sum(b.converged for b in block) / reps,
            sum(b.explosion for b in block) / reps,
            float(np.mean(means)) if means else math.nan,
            float(np.mean(vars_)) if vars_ else math.nan,
            w.lipschitz_y() < 1.0,
        ))
    return rows, summaries


SWEEP_COLUMNS = ("psi1", "seed", "converged", "explosion", "decay_rate", "mean", "variance")


def write_sweep_csv(rows, path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="", encoding="utf-8") as fh:
        wr = csv.writer(fh, lineterminator="\n")
        wr.writerow(SWEEP_COLUMNS)
        for r in rows:
            wr.writerow([repr(r.psi1), r.seed, int(r.converged), int(r.explosion),
                         repr(r.decay_rate), repr(r.mean), repr(r.variance)])
    return path
