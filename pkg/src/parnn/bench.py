"""Benchmark orchestration: fit, forecast, score, rank and test.

Every (dataset, model, term) cell is an independent task. Results are
collected in submission order and written by the parent process only, so
report files do not depend on how many workers ran. Wall-clock runtimes
stay in memory and in the log; they are never written to the report
files, which must be byte-identical across reruns.
"""

from __future__ import annotations

import csv
import logging
import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from xml.sax.saxutils import escape

import numpy as np
from scipy import stats as sps

from . import stats
from .arima import arima_extend, arima_forecast, auto_arima
from .data import DatasetSpec, load_csv
from .errors import ParnnError
from .intervals import SimulationConfig, forecast_interval
from .metrics import EvalContext
from .model import ParnnConfig, extend, fit_arnn, fit_parnn, forecast_recursive
from .series import Term, TimeSeries, chronological_split, horizon_for

log = logging.getLogger(__name__)

MODELS = ("arima", "arnn", "parnn")
METRICS = ("mase", "rmse", "smape")


@dataclass(frozen=True)
class BenchConfig:
    parnn: ParnnConfig = field(default_factory=ParnnConfig)
    sim: SimulationConfig = field(default_factory=SimulationConfig)
    refit: bool = True
    intervals: bool = True
    svg: bool = False
    jobs: int = 1


@dataclass(frozen=True, eq=False)
class CellResult:
    dataset: str
    model: str
    term: str
    horizon: int
    status: str  # "ok" or "failed"
    scores: dict = field(default_factory=dict)
    pkq: tuple | None = None
    arima_order: str = ""
    error: str = ""
    history: np.ndarray | None = None
    actual: np.ndarray | None = None
    point: np.ndarray | None = None
    lower: np.ndarray | None = None
    upper: np.ndarray | None = None
    runtime: float = 0.0


@dataclass(eq=False)
class BenchmarkReport:
    cells: list[CellResult]
    rank_columns: list[str] = field(default_factory=list)
    ranks: np.ndarray | None = None
    friedman: dict = field(default_factory=dict)  # metric -> FriedmanResult
    mcb: list = field(default_factory=list)
    notices: list[str] = field(default_factory=list)

    def cell(self, dataset, model, term) -> CellResult:
        for c in self.cells:
            if (c.dataset, c.model, c.term) == (dataset, model, term):
                return c
        raise KeyError((dataset, model, term))


def fit_and_forecast(model: str, train: TimeSeries, validation: TimeSeries, h: int,
                     cfg: BenchConfig):
    """Fit one model on the pre-test data and forecast ``h`` steps.

    Returns (point, lower, upper, pkq, arima_order); bounds are None when
    the model has no interval simulation.
    """
    pc = cfg.parnn
    lower = upper = None
    if model == "arima":
        if cfg.refit:
            m = auto_arima(train.concat(validation), pc.arima_max_p, pc.arima_max_q, pc.arima_max_d)
        else:
            m = arima_extend(auto_arima(train, pc.arima_max_p, pc.arima_max_q, pc.arima_max_d),
                             validation)
        return arima_forecast(m, h), None, None, None, str(m.order)
    if model == "arnn":
        if cfg.refit:
            nm = fit_arnn(train.concat(validation), pc)
        else:
            nm = extend(fit_arnn(train, pc), validation)
    elif model == "parnn":
        nm, _ = fit_parnn(train, validation, pc, refit=cfg.refit)
    else:
        raise ValueError(f"unknown model {model!r}")
    if cfg.intervals:
        iv = forecast_interval(nm, h, cfg.sim)
        point, lower, upper = iv.point, iv.lower, iv.upper
    else:
        point = forecast_recursive(nm, h)
    order = str(nm.arima.order) if nm.arima is not None else ""
    return point, lower, upper, nm.pkq, order


def run_cell(task) -> CellResult:
    name, series, model, term, cfg = task
    t0 = time.perf_counter()
    h = horizon_for(series.frequency, term, len(series))
    try:
        split = chronological_split(series, h)
        point, lo, hi, pkq, order = fit_and_forecast(model, split.train, split.validation, h, cfg)
        history = split.train_validation.values
        ctx = EvalContext(history, split.test.values, point, series.seasonal_period)
        scores = ctx.scores()
    except ParnnError as exc:
        log.warning("%s / %s / %s failed: %s", name, model, term, exc)
        return CellResult(name, model, term, h, "failed", error=f"{type(exc).__name__}: {exc}",
                          runtime=time.perf_counter() - t0)
    dt = time.perf_counter() - t0
    log.info("%s / %s / %s done in %.1fs", name, model, term, dt)
    return CellResult(name, model, term, h, "ok", scores, pkq, order, "", history,
                      split.test.values, point, lo, hi, dt)


def _rankings(cells, models, report: BenchmarkReport):
    ok = {(c.dataset, c.term, c.model): c for c in cells if c.status == "ok"}
    columns = []
    for c in cells:
        col = (c.dataset, c.term)
        if col not in columns and all((c.dataset, c.term, m) in ok for m in models):
            columns.append(col)
    report.rank_columns = [f"{d}/{t}" for d, t in columns]
    if len(models) < 2 or not columns:
        report.notices.append(f"ranking skipped: {len(models)} model(s), {len(columns)} complete column(s)")
        return
    tables = {m: np.array([[ok[(d, t, mod)].scores[m] for d, t in columns] for mod in models])
              for m in METRICS}
    report.ranks = sps.rankdata(tables["mase"], method="average", axis=0)
    if len(columns) < 2:
        report.notices.append("significance tests skipped: fewer than two dataset columns")
        return
    for m in METRICS:
        rm = stats.rank_scores(stats.ScoreTable(list(models), report.rank_columns, tables[m]))
        if len(models) >= 3:
            report.friedman[m] = stats.friedman_test(rm)
        if m == "mase":
            report.mcb = stats.mcb_intervals(rm)
    if len(models) < 3:
        report.notices.append("Friedman test skipped: fewer than three models")


def _fmt(v) -> str:
    if v is None:
        return ""
    if isinstance(v, float):
        return repr(v) if math.isfinite(v) else str(v)
    return str(v)


def write_report(report: BenchmarkReport, models, out_dir) -> None:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    with (out / "report.csv").open("w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["dataset", "term", "model", "horizon", *METRICS, "p", "k", "q",
                    "arima_order", "status", "error"])
        for c in report.cells:
            p, k, q = c.pkq or ("", "", "")
            w.writerow([c.dataset, c.term, c.model, c.horizon,
                        *[_fmt(c.scores.get(m)) for m in METRICS], p, k, q,
                        c.arima_order, c.status, c.error])
    with (out / "ranks.csv").open("w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["model", *report.rank_columns, "avg_rank"])
        if report.ranks is not None:
            for i, m in enumerate(models):
                w.writerow([m, *[_fmt(float(r)) for r in report.ranks[i]],
                            _fmt(float(report.ranks[i].mean()))])
    lines = []
    for m in METRICS:
        f = report.friedman.get(m)
        if f is not None:
            lines.append(f"[{m}]")
            lines.append(f"chi2_F = {f.chi2_f!r}")
            lines.append(f"F_F = {f.f_f!r}")
            lines.append(f"df = ({f.df1}, {f.df2})")
            lines.append(f"critical_F_5pct = {f.critical_value!r}")
            lines.append(f"reject_at_5pct = {f.reject_at_5pct}")
            lines.append("")
    lines += [f"# {n}" for n in report.notices]
    (out / "friedman.txt").write_text("\n".join(lines) + "\n", encoding="utf-8")
    with (out / "mcb.csv").open("w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["model", "avg_rank", "lower", "upper", "half_width", "significantly_worse_than_best"])
        for r in report.mcb:
            w.writerow([r.model, _fmt(r.avg_rank), _fmt(r.lower), _fmt(r.upper), _fmt(r.half_width),
                        int(r.significantly_worse_than_best)])


def _slug(s: str) -> str:
    return "".join(ch if ch.isalnum() else "_" for ch in s).strip("_").lower()


def run_benchmark(specs: list[DatasetSpec], models=MODELS, terms=("short",),
                  cfg: BenchConfig = BenchConfig(), out_dir="bench_out",
                  series: dict[str, TimeSeries] | None = None) -> BenchmarkReport:
    """Run every (dataset, model, term) cell and write the report files.

    ``series`` may supply already-loaded data keyed by spec name.
    """
    models = [m for m in MODELS if m in set(models)]
    terms = [Term(t).value for t in terms]
    loaded = dict(series or {})
    for s in specs:
        if s.name not in loaded:
            loaded[s.name] = load_csv(s)
    tasks = [(s.name, loaded[s.name], m, t, cfg) for s in specs for t in terms for m in models]
    if cfg.jobs > 1:
        with ProcessPoolExecutor(max_workers=cfg.jobs) as ex:
            cells = list(ex.map(run_cell, tasks))
    else:
        cells = [run_cell(t) for t in tasks]
    if not any(c.status == "ok" for c in cells):
        raise ParnnError("benchmark produced no successful cells")

    report = BenchmarkReport(cells)
    _rankings(cells, models, report)
    write_report(report, models, out_dir)
    fc_dir = Path(out_dir) / "forecasts"
    for c in cells:
        if c.status != "ok":
            continue
        stem = f"{_slug(c.dataset)}__{c.model}__{c.term}"
        emit_forecast_plot_data(c.history, c.point, fc_dir / f"{stem}.csv", actual=c.actual,
                                lower=c.lower, upper=c.upper, svg=cfg.svg)
    return report


def emit_forecast_plot_data(history, point, out_path, *, actual=None, lower=None, upper=None,
                            svg: bool = False) -> Path:
    """Write history and forecast rows as CSV, optionally with an SVG chart beside it.

    Columns: t, actual_or_blank, point, lower, upper, segment. Interval
    columns are blank when no bounds are given.
    """
    history = np.asarray(history, dtype=np.float64)
    point = np.asarray(point, dtype=np.float64)
    h = point.size
    out_path = Path(out_path)
    out_path.parent.mkdir(parents=True, exist_ok=True)
    with out_path.open("w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["t", "actual_or_blank", "point", "lower", "upper", "segment"])
        for t, v in enumerate(history):
            w.writerow([t, repr(float(v)), "", "", "", "history"])
        for j in range(h):
            a = "" if actual is None else repr(float(actual[j]))
            lo = "" if lower is None else repr(float(lower[j]))
            hi = "" if upper is None else repr(float(upper[j]))
            w.writerow([history.size + j, a, repr(float(point[j])), lo, hi, "forecast"])
    if svg:
        out_path.with_suffix(".svg").write_text(
            _svg_chart(history, point, actual, lower, upper), encoding="utf-8")
    return out_path


def _svg_chart(history, point, actual, lower, upper, width=720, height=320, pad=30) -> str:
    n = history.size + point.size
    pieces = [history, point] + [np.asarray(a, dtype=np.float64) for a in (actual, lower, upper)
                                 if a is not None]
    allv = np.concatenate(pieces)
    lo, hi = float(allv.min()), float(allv.max())
    if hi == lo:
        hi = lo + 1.0

    def xy(t, v):
        x = pad + (width - 2 * pad) * t / max(n - 1, 1)
        y = height - pad - (height - 2 * pad) * (v - lo) / (hi - lo)
        return f"{x:.2f},{y:.2f}"

    def line(ts, vs, colour):
        pts = " ".join(xy(t, v) for t, v in zip(ts, vs))
        return f'<polyline fill="none" stroke="{colour}" stroke-width="1.5" points="{pts}"/>'

    ft = np.arange(history.size, n)
    body = []
    if lower is not None and upper is not None:
        pts = [xy(t, v) for t, v in zip(ft, upper)] + [xy(t, v) for t, v in zip(ft[::-1], np.asarray(lower)[::-1])]
        body.append(f'<polygon fill="#d62728" fill-opacity="0.2" stroke="none" points="{" ".join(pts)}"/>')
    body.append(line(np.arange(history.size), history, "#000000"))
    if actual is not None:
        body.append(line(ft, actual, "#1f77b4"))
    body.append(line(ft, point, "#d62728"))
    title = escape("forecast with prediction interval" if lower is not None else "forecast")
    return (f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
            f'viewBox="0 0 {width} {height}">\n<title>{title}</title>\n'
            f'<rect width="{width}" height="{height}" fill="#ffffff"/>\n'
            + "\n".join(body) + "\n</svg>\n")
