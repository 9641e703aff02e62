"""Command-line entry point.

Exit codes: 0 success, 1 usage error, 2 data error, 3 estimation error.
Settings may come from an INI file (``--config``, section ``[parnn]``);
flags given on the command line take precedence.
"""

from __future__ import annotations

import argparse
import configparser
import logging
import sys
from pathlib import Path

from . import __version__
from .arima import arima_forecast, auto_arima
from .bench import MODELS, BenchConfig, emit_forecast_plot_data, fit_and_forecast, run_benchmark
from .data import DatasetSpec, load_csv, registry_from_ini
from .ergolab import Parnn11Weights, stationarity_sweep, write_sweep_csv
from .errors import DataError, DomainError, EstimationError, ParnnError, ShapeError, SizingError
from .intervals import SimulationConfig
from .model import ParnnConfig, fit_arnn, fit_parnn
from .neuralnet import TrainConfig
from .series import Term, chronological_split, horizon_for

log = logging.getLogger("parnn")

EXIT_OK, EXIT_USAGE, EXIT_DATA, EXIT_ESTIMATION = 0, 1, 2, 3

# config keys and their types; names match the long flags with '-' -> '_'
_CONFIG_KEYS = {
    "reps": int, "search_reps": int, "grid_max": int, "seed": int, "epochs": int,
    "learning_rate": float, "paths": int, "level": float, "jobs": int,
    "models": str, "terms": str, "datasets": str, "registry": str, "out": str,
    "psi1_grid": str, "steps": int,
}


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _add_data_args(sp):
    g = sp.add_argument_group("data")
    g.add_argument("--data", help="CSV file holding one series")
    g.add_argument("--column", default="value", help="value column name (default: value)")
    g.add_argument("--date-column", default=None, help="optional date column name")
    g.add_argument("--frequency", default="monthly",
                   choices=["daily", "weekly", "monthly", "quarterly"])
    g.add_argument("--seasonal-period", type=int, default=1)
    g.add_argument("--registry", help="INI registry of datasets (alternative to --data)")
    g.add_argument("--dataset", help="dataset name inside --registry")


def _add_model_args(sp):
    sp.add_argument("--reps", type=int, help="ensemble size (default 500)")
    sp.add_argument("--grid-max", type=int, help="largest p and q searched (default 10)")
    sp.add_argument("--seed", type=int, help="base seed (default 0)")
    sp.add_argument("--epochs", type=int, help="training epochs per network")
    sp.add_argument("--learning-rate", type=float)
    sp.add_argument("--search-reps", type=int, help="networks per grid cell")
    sp.add_argument("--no-refit", action="store_true",
                    help="train the final model on the training split only")


def build_parser() -> argparse.ArgumentParser:
    ap = _Parser(prog="parnn", description="Hybrid ARIMA / neural network forecasting")
    ap.add_argument("--config", help="INI file with a [parnn] section")
    ap.add_argument("-v", "--verbose", action="count", default=0)
    sub = ap.add_subparsers(dest="command", required=True, parser_class=_Parser)

    f = sub.add_parser("fit", help="fit one model to one dataset and print the chosen orders")
    _add_data_args(f)
    _add_model_args(f)
    f.add_argument("--model", default="parnn", choices=MODELS)
    f.add_argument("--term", default="short", choices=[t.value for t in Term])

    fc = sub.add_parser("forecast", help="fit on the whole series and write forecast CSV/SVG")
    _add_data_args(fc)
    _add_model_args(fc)
    fc.add_argument("--model", default="parnn", choices=MODELS)
    fc.add_argument("--horizon", type=int, required=True)
    fc.add_argument("--level", type=float, help="interval coverage (default 0.8)")
    fc.add_argument("--paths", type=int, help="simulated paths (default 1000)")
    fc.add_argument("--out", default="forecast.csv")
    fc.add_argument("--svg", action="store_true")

    b = sub.add_parser("benchmark", help="run the dataset x model x term grid")
    b.add_argument("--registry", help="INI registry of datasets")
    b.add_argument("--datasets", help="comma-separated names from the registry (default: all)")
    b.add_argument("--data", action="append", default=[],
                   help="CSV file as NAME=PATH:FREQUENCY[:COLUMN]; repeatable")
    b.add_argument("--models", help="comma-separated subset of arima,arnn,parnn")
    b.add_argument("--terms", help="comma-separated subset of short,medium,long")
    b.add_argument("--out", help="output directory (default bench_out)")
    b.add_argument("--jobs", type=int, help="worker processes (default 1)")
    b.add_argument("--paths", type=int)
    b.add_argument("--level", type=float)
    b.add_argument("--no-intervals", action="store_true")
    b.add_argument("--svg", action="store_true")
    _add_model_args(b)

    e = sub.add_parser("ergodicity", help="stationarity sweep for PARNN(1,k,1)")
    e.add_argument("--psi1-grid", help="comma-separated psi1 values (default 0.2,0.5,0.9,1.5)")
    e.add_argument("--steps", type=int, help="transitions per chain (default 2000)")
    e.add_argument("--reps", type=int, help="seeds per grid point (default 10)")
    e.add_argument("--seed", type=int)
    e.add_argument("--linear", action="store_true", help="zero the nonlinear part")
    e.add_argument("--out", help="CSV path (default ergodicity.csv)")

    sub.add_parser("version", help="print the version")
    return ap


def _load_config(path) -> dict:
    if path is None:
        return {}
    cp = configparser.ConfigParser()
    if not cp.read(path, encoding="utf-8"):
        raise UsageError(f"config file not found: {path}")
    if "parnn" not in cp:
        raise UsageError(f"{path}: no [parnn] section")
    out = {}
    for key, raw in cp["parnn"].items():
        key = key.replace("-", "_")
        if key not in _CONFIG_KEYS:
            raise UsageError(f"{path}: unknown key {key!r}")
        try:
            out[key] = _CONFIG_KEYS[key](raw)
        except ValueError:
            raise UsageError(f"{path}: bad value for {key}: {raw!r}") from None
    return out


def _merge(args, conf: dict):
    for key, val in conf.items():
        if getattr(args, key, None) is None:
            setattr(args, key, val)
    return args


def _opt(args, name, default):
    v = getattr(args, name, None)
    return default if v is None else v


def _parnn_config(args) -> ParnnConfig:
    grid = _opt(args, "grid_max", 10)
    tc = TrainConfig(epochs=_opt(args, "epochs", 1500), learning_rate=_opt(args, "learning_rate", 0.05))
    return ParnnConfig(max_p=grid, max_q=grid, reps=_opt(args, "reps", 500),
                       search_reps=_opt(args, "search_reps", 20), base_seed=_opt(args, "seed", 0),
                       train_cfg=tc)


def _sim_config(args) -> SimulationConfig:
    return SimulationConfig(n_paths=_opt(args, "paths", 1000), level=_opt(args, "level", 0.8),
                            seed=_opt(args, "seed", 0))


def _single_spec(args) -> DatasetSpec:
    if args.registry:
        specs = registry_from_ini(args.registry)
        if args.dataset is None and len(specs) == 1:
            return specs[0]
        for s in specs:
            if s.name == args.dataset:
                return s
        raise DataError(f"dataset {args.dataset!r} not in {args.registry}")
    if not args.data:
        raise UsageError("give --data or --registry")
    return DatasetSpec(Path(args.data).stem, args.data, args.frequency, args.seasonal_period,
                       args.column, args.date_column)


def _parse_data_flag(item: str) -> DatasetSpec:
    try:
        name, rest = item.split("=", 1)
        parts = rest.rsplit(":", 2)
        if len(parts) == 3 and parts[1] in ("daily", "weekly", "monthly", "quarterly"):
            path, freq, col = parts
        else:
            path, freq = rest.rsplit(":", 1)
            col = "value"
        return DatasetSpec(name, path, freq, 1, col, None)
    except ValueError:
        raise UsageError(f"--data expects NAME=PATH:FREQUENCY[:COLUMN], got {item!r}") from None


def _csv_list(text, allowed, what):
    items = [s.strip() for s in text.split(",") if s.strip()]
    bad = [s for s in items if s not in allowed]
    if bad or not items:
        raise UsageError(f"unknown {what}: {bad or text!r}; choose from {','.join(allowed)}")
    return items


def cmd_fit(args) -> int:
    spec = _single_spec(args)
    series = load_csv(spec)
    h = horizon_for(series.frequency, args.term, len(series))
    split = chronological_split(series, h)
    cfg = _parnn_config(args)
    if args.model == "arima":
        m = auto_arima(split.train_validation if not args.no_refit else split.train,
                       cfg.arima_max_p, cfg.arima_max_q, cfg.arima_max_d)
        print(f"{spec.name}: ARIMA{m.order} aic={m.aic:.4f}")
    elif args.model == "arnn":
        m = fit_arnn(split.train_validation if not args.no_refit else split.train, cfg)
        print(f"{spec.name}: ARNN(p={m.p}, k={m.k})")
    else:
        m, grid = fit_parnn(split.train, split.validation, cfg, refit=not args.no_refit)
        p, k, q = m.pkq
        print(f"{spec.name}: PARNN(p={p}, k={k}, q={q}) ARIMA{m.arima.order} "
              f"validation_mase={grid.mase:.6f}")
    return EXIT_OK


def cmd_forecast(args) -> int:
    spec = _single_spec(args)
    series = load_csv(spec)
    if args.horizon < 1:
        raise UsageError("--horizon must be positive")
    cfg = BenchConfig(parnn=_parnn_config(args), sim=_sim_config(args),
                      refit=not args.no_refit, intervals=True, svg=args.svg)
    # validation segment for the grid search: twice the horizon at the end of the series
    v = 2 * args.horizon
    if len(series) < v + 2:
        raise SizingError(f"series of length {len(series)} too short for horizon {args.horizon}")
    train, validation = series.slice(0, len(series) - v), series.slice(len(series) - v)
    if args.model == "arima":
        m = auto_arima(series, cfg.parnn.arima_max_p, cfg.parnn.arima_max_q, cfg.parnn.arima_max_d)
        point, lo, hi = arima_forecast(m, args.horizon), None, None
    else:
        point, lo, hi, _, _ = fit_and_forecast(args.model, train, validation, args.horizon, cfg)
    out = emit_forecast_plot_data(series.values, point, args.out, lower=lo, upper=hi, svg=args.svg)
    print(out)
    return EXIT_OK


def cmd_benchmark(args) -> int:
    specs = []
    if args.registry:
        specs = registry_from_ini(args.registry)
        if args.datasets:
            names = [s.strip() for s in args.datasets.split(",")]
            known = {s.name for s in specs}
            missing = [n for n in names if n not in known]
            if missing:
                raise DataError(f"datasets not in registry: {missing}")
            specs = [s for s in specs if s.name in names]
    specs += [_parse_data_flag(d) for d in args.data]
    if not specs:
        raise UsageError("give --registry and/or --data")
    models = _csv_list(_opt(args, "models", ",".join(MODELS)), MODELS, "model")
    terms = _csv_list(_opt(args, "terms", "short"), [t.value for t in Term], "term")
    jobs = _opt(args, "jobs", 1)
    if jobs < 1:
        raise UsageError("--jobs must be >= 1")
    cfg = BenchConfig(parnn=_parnn_config(args), sim=_sim_config(args), refit=not args.no_refit,
                      intervals=not args.no_intervals, svg=args.svg, jobs=jobs)
    out = _opt(args, "out", "bench_out")
    report = run_benchmark(specs, models, terms, cfg, out)
    n_failed = sum(c.status != "ok" for c in report.cells)
    print(f"{len(report.cells) - n_failed} cells ok, {n_failed} failed; reports in {out}")
    for n in report.notices:
        print(f"note: {n}")
    return EXIT_OK


def default_sweep_template(linear: bool = False) -> Parnn11Weights:
    """Two hidden units with a y-Lipschitz contribution of 0.0725."""
    if linear:
        return Parnn11Weights(psi2=0.3, nu=0.1)
    return Parnn11Weights(psi2=0.3, nu=0.1, betas=[0.5, -0.3], phis1=[0.4, 0.3],
                          phis2=[0.2, -0.1], mus=[0.1, -0.2])


def cmd_ergodicity(args) -> int:
    try:
        grid = [float(v) for v in _opt(args, "psi1_grid", "0.2,0.5,0.9,1.5").split(",")]
    except ValueError:
        raise UsageError("--psi1-grid expects comma-separated numbers") from None
    steps, reps = _opt(args, "steps", 2000), _opt(args, "reps", 10)
    if steps < 2 or reps < 1:
        raise UsageError("--steps must be >= 2 and --reps >= 1")
    rows, summaries = stationarity_sweep(default_sweep_template(args.linear), grid, steps, reps,
                                         _opt(args, "seed", 0))
    out = write_sweep_csv(rows, _opt(args, "out", "ergodicity.csv"))
    print("psi1  converged  exploded  mean  variance  contraction")
    for s in summaries:
        print(f"{s.psi1:g}  {s.converged_fraction:.2f}  {s.explosion_fraction:.2f}  "
              f"{s.mean:.4g}  {s.variance:.4g}  {s.contraction_certified}")
    print(out)
    return EXIT_OK


_COMMANDS = {"fit": cmd_fit, "forecast": cmd_forecast, "benchmark": cmd_benchmark,
             "ergodicity": cmd_ergodicity}


def main(argv=None) -> int:
    ap = build_parser()
    args = ap.parse_args(argv)
    logging.basicConfig(level=logging.WARNING - 10 * min(args.verbose, 2),
                        format="%(levelname)s %(name)s: %(message)s", stream=sys.stderr)
    if args.command == "version":
        print(__version__)
        return EXIT_OK
    try:
        _merge(args, _load_config(args.config))
        return _COMMANDS[args.command](args)
    except UsageError as exc:
        print(f"parnn: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (DataError, SizingError, DomainError, ShapeError) as exc:
        print(f"parnn: data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except EstimationError as exc:
        print(f"parnn: estimation error: {exc}", file=sys.stderr)
        return EXIT_ESTIMATION
    except ParnnError as exc:
        print(f"parnn: error: {exc}", file=sys.stderr)
        return EXIT_ESTIMATION
    except ValueError as exc:
        print(f"parnn: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as exc:
        print(f"parnn: data error: {exc}", file=sys.stderr)
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())
