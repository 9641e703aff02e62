"""Benchmark ARIMA, ARNN and PARNN on the bundled real series.

Wraps the ``parnn benchmark`` command so the whole grid (both datasets,
all three terms) can be reproduced with one call.
"""

import argparse
import logging
import time
from pathlib import Path

from parnn.bench import BenchConfig, run_benchmark
from parnn.data import registry_from_ini
from parnn.intervals import SimulationConfig
from parnn.model import ParnnConfig

ROOT = Path(__file__).resolve().parents[1]


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--reps", type=int, default=500)
    ap.add_argument("--grid-max", type=int, default=10)
    ap.add_argument("--terms", default="short,medium,long")
    ap.add_argument("--jobs", type=int, default=1)
    ap.add_argument("--out", default="results/benchmark")
    args = ap.parse_args()
    logging.basicConfig(level=logging.INFO, format="%(message)s")
    cfg = BenchConfig(parnn=ParnnConfig(max_p=args.grid_max, max_q=args.grid_max, reps=args.reps),
                      sim=SimulationConfig(), svg=True, jobs=args.jobs)
    specs = registry_from_ini(ROOT / "data" / "registry.ini")
    t0 = time.perf_counter()
    report = run_benchmark(specs, ["arima", "arnn", "parnn"], args.terms.split(","), cfg, args.out)
    print(f"{len(report.cells)} cells in {time.perf_counter() - t0:.0f}s -> {args.out}")
    print("dataset        term    model  mase    (p,k,q)")
    for c in report.cells:
        m = c.scores.get("mase", float("nan"))
        print(f"{c.dataset:<14} {c.term:<7} {c.model:<6} {m:.4f}  {c.pkq or ''} {c.error}")
    for n in report.notices:
        print("note:", n)


if __name__ == "__main__":
    main()
