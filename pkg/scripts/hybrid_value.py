"""PARNN against auto-ARIMA on a nonlinear AR process.

y_t = 0.5 y_{t-1} + 0.4 sin(y_{t-2}) + eps_t, n = 600, horizon 12.
Prints the test MASE of both models per seed and the PARNN win count.
"""

import argparse
import time

from parnn.arima import arima_forecast, auto_arima
from parnn.metrics import mase
from parnn.model import ParnnConfig, fit_parnn, forecast_recursive
from parnn.series import TimeSeries, chronological_split
from parnn.synthetic import sine_ar


def one_replication(seed, cfg, h=12, n=600):
    series = TimeSeries(sine_ar(n, seed))
    split = chronological_split(series, h)
    tv = split.train_validation
    arima = auto_arima(tv, cfg.arima_max_p, cfg.arima_max_q, cfg.arima_max_d)
    m_arima = mase(tv, split.test, arima_forecast(arima, h))
    model, _ = fit_parnn(split.train, split.validation, cfg)
    m_parnn = mase(tv, split.test, forecast_recursive(model, h))
    return m_parnn, m_arima, model.pkq


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--seeds", type=int, default=10)
    ap.add_argument("--reps", type=int, default=50)
    ap.add_argument("--grid-max", type=int, default=3)
    args = ap.parse_args()
    cfg = ParnnConfig(max_p=args.grid_max, max_q=args.grid_max, reps=args.reps)
    wins = 0
    for seed in range(args.seeds):
        t0 = time.perf_counter()
        mp, ma, pkq = one_replication(seed, cfg)
        wins += mp <= ma
        print(f"seed {seed}: parnn {mp:.4f} {pkq}  arima {ma:.4f}  ({time.perf_counter() - t0:.1f}s)")
    print(f"PARNN MASE <= ARIMA MASE in {wins}/{args.seeds}")


if __name__ == "__main__":
    main()
