"""Empirical coverage of simulated one-step prediction intervals on Gaussian AR(1) data.

Each replication draws a fresh AR(1) series, runs the full pipeline
(ARIMA stage, grid search, refit, path simulation) and records whether the
first test observation falls inside the nominal interval.
"""

import argparse
import time

import numpy as np

from parnn.intervals import SimulationConfig, forecast_interval
from parnn.model import ParnnConfig, fit_parnn
from parnn.series import TimeSeries, chronological_split
from parnn.synthetic import ar_process


def covered(seed, cfg, sim, n=150, h=4, phi=0.6):
    split = chronological_split(TimeSeries(ar_process(n, phi, seed, mean=10.0, burn=100)), h)
    model, _ = fit_parnn(split.train, split.validation, cfg)
    iv = forecast_interval(model, h, SimulationConfig(sim.n_paths, sim.level, seed))
    return bool(iv.lower[0] <= split.test.values[0] <= iv.upper[0])


def coverage(n_rep, cfg, sim, **kw):
    hits = [covered(seed, cfg, sim, **kw) for seed in range(n_rep)]
    return float(np.mean(hits))


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--replications", type=int, default=200)
    ap.add_argument("--reps", type=int, default=20)
    ap.add_argument("--grid-max", type=int, default=2)
    ap.add_argument("--level", type=float, default=0.8)
    args = ap.parse_args()
    cfg = ParnnConfig(max_p=args.grid_max, max_q=args.grid_max, reps=args.reps, search_reps=5)
    sim = SimulationConfig(1000, args.level)
    t0 = time.perf_counter()
    cov = coverage(args.replications, cfg, sim)
    print(f"horizon-1 coverage at nominal {args.level:.0%}: {cov:.3f} "
          f"over {args.replications} replications ({time.perf_counter() - t0:.0f}s)")


if __name__ == "__main__":
    main()
