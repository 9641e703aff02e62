import csv
import filecmp
import xml.etree.ElementTree as ET

import numpy as np
import pytest

from parnn import cli
from parnn.bench import BenchConfig, emit_forecast_plot_data, run_benchmark
from parnn.data import DatasetSpec, load_csv, registry_from_ini
from parnn.errors import DataError
from parnn.intervals import SimulationConfig
from parnn.model import ParnnConfig, hidden_size
from parnn.neuralnet import TrainConfig
from parnn.series import Frequency, TimeSeries
from parnn.synthetic import ar_process

TINY = BenchConfig(parnn=ParnnConfig(max_p=2, max_q=2, reps=4, search_reps=2,
                                     train_cfg=TrainConfig(epochs=100)),
                   sim=SimulationConfig(n_paths=50))


def _write(path, text):
    path.write_text(text, encoding="utf-8")
    return path


def _series_csv(path, values, header="date,value"):
    lines = [header] + [f"2020-{i:04d},{float(v)!r}" for i, v in enumerate(values)]
    return _write(path, "\n".join(lines) + "\n")


def test_load_csv_examples(tmp_path):
    p = _series_csv(tmp_path / "a.csv", [1.0, 2.5, 3.0, 4.0, 5.5])
    assert load_csv(DatasetSpec("a", p)).values.tolist() == [1.0, 2.5, 3.0, 4.0, 5.5]
    blank = _write(tmp_path / "b.csv", "date,value\nx,1\ny,\nz,3\n")
    with pytest.raises(DataError, match="line 3"):
        load_csv(DatasetSpec("b", blank))
    wide = _write(tmp_path / "c.csv", "id,date,extra,target\n1,d1,9,10.5\n2,d2,9,11.5\n")
    spec = DatasetSpec("c", wide, value_column="target")
    assert load_csv(spec).values.tolist() == [10.5, 11.5]


def test_load_csv_errors(tmp_path):
    with pytest.raises(DataError, match="not found"):
        load_csv(DatasetSpec("x", tmp_path / "missing.csv"))
    p = _series_csv(tmp_path / "a.csv", [1.0, 2.0])
    with pytest.raises(DataError, match="column"):
        load_csv(DatasetSpec("a", p, value_column="nope"))
    bad = _write(tmp_path / "bad.csv", "date,value\nd,1\nd,1,5\nd,abc\n")
    with pytest.raises(DataError, match="line 4"):
        load_csv(DatasetSpec("bad", bad))


def test_registry_and_bundled_data():
    specs = {s.name: s for s in registry_from_ini("data/registry.ini")}
    assert len(load_csv(specs["Arrivals"])) == 127
    assert specs["Arrivals"].frequency is Frequency.QUARTERLY
    assert len(load_csv(specs["Canadian Gas"])) == 542


def test_single_model_skips_tests(tmp_path):
    ts = TimeSeries(ar_process(60, 0.6, 0, mean=10.0), Frequency.QUARTERLY)
    spec = DatasetSpec("ar1", tmp_path / "unused.csv", Frequency.QUARTERLY)
    rep = run_benchmark([spec], ["arima"], ["short"], TINY, tmp_path / "out", series={"ar1": ts})
    assert len(rep.cells) == 1 and rep.cells[0].status == "ok"
    assert rep.friedman == {} and rep.mcb == []
    assert any("skipped" in n for n in rep.notices)
    text = (tmp_path / "out" / "friedman.txt").read_text()
    assert "skipped" in text
    with open(tmp_path / "out" / "mcb.csv") as fh:
        assert len(list(csv.reader(fh))) == 1


def _three_datasets():
    out = {}
    for i, phi in enumerate([0.3, 0.6, 0.8]):
        out[f"s{i}"] = TimeSeries(ar_process(70, phi, i, mean=20.0), Frequency.QUARTERLY)
    return out


def _specs(tmp_path, names):
    return [DatasetSpec(n, tmp_path / f"{n}.csv", Frequency.QUARTERLY) for n in names]


def test_three_by_three_grid(tmp_path):
    data = _three_datasets()
    rep = run_benchmark(_specs(tmp_path, data), ["arima", "arnn", "parnn"], ["short"], TINY,
                        tmp_path / "out", series=data)
    assert rep.ranks.shape == (3, 3)
    assert np.allclose(rep.ranks.sum(axis=0), 6)
    assert set(rep.friedman) == {"mase", "rmse", "smape"}
    assert len(rep.mcb) == 3
    for c in rep.cells:
        assert c.status == "ok"
        if c.model == "parnn":
            p, k, q = c.pkq
            assert k == hidden_size(p, q)
    for name in ["report.csv", "ranks.csv", "friedman.txt", "mcb.csv"]:
        assert (tmp_path / "out" / name).is_file()
    assert len(list((tmp_path / "out" / "forecasts").glob("*.csv"))) == 9


def test_failed_cells_are_recorded(tmp_path):
    data = _three_datasets()
    data["tiny"] = TimeSeries(np.arange(1.0, 11.0), Frequency.QUARTERLY)  # too short for h=4
    rep = run_benchmark(_specs(tmp_path, data), ["arima"], ["short"], TINY, tmp_path / "o",
                        series=data)
    failed = [c for c in rep.cells if c.status == "failed"]
    assert [c.dataset for c in failed] == ["tiny"] and "SizingError" in failed[0].error
    rows = list(csv.DictReader(open(tmp_path / "o" / "report.csv")))
    assert rows[-1]["status"] == "failed" and rows[-1]["error"]


def test_deterministic_rerun(tmp_path):
    data = _three_datasets()
    for out in ("a", "b"):
        run_benchmark(_specs(tmp_path, data), ["arima", "parnn"], ["short"], TINY, tmp_path / out,
                      series=data)
    cmp = filecmp.dircmp(tmp_path / "a", tmp_path / "b")
    assert not cmp.diff_files and not cmp.left_only and not cmp.right_only
    assert not filecmp.dircmp(tmp_path / "a/forecasts", tmp_path / "b/forecasts").diff_files


def test_no_look_ahead(tmp_path):
    y = ar_process(70, 0.6, 9, mean=20.0)
    corrupt = y.copy()
    corrupt[-4:] = 1e6
    spec = _specs(tmp_path, ["s"])
    a = run_benchmark(spec, ["arima", "arnn", "parnn"], ["short"], TINY, tmp_path / "a",
                      series={"s": TimeSeries(y, Frequency.QUARTERLY)})
    b = run_benchmark(spec, ["arima", "arnn", "parnn"], ["short"], TINY, tmp_path / "b",
                      series={"s": TimeSeries(corrupt, Frequency.QUARTERLY)})
    for ca, cb in zip(a.cells, b.cells):
        assert np.array_equal(ca.point, cb.point)
        assert ca.pkq == cb.pkq and ca.arima_order == cb.arima_order
        if ca.lower is not None:
            assert np.array_equal(ca.lower, cb.lower)
        assert ca.scores != cb.scores


def test_plot_data_rows_and_svg(tmp_path):
    hist = np.linspace(1, 20, 20)
    out = emit_forecast_plot_data(hist, np.ones(4), tmp_path / "f.csv", actual=np.ones(4) * 2,
                                  lower=np.zeros(4), upper=np.ones(4) * 3, svg=True)
    rows = list(csv.DictReader(open(out)))
    assert len(rows) == 24
    assert list(rows[0]) == ["t", "actual_or_blank", "point", "lower", "upper", "segment"]
    assert {r["segment"] for r in rows} == {"history", "forecast"}
    root = ET.parse(tmp_path / "f.svg").getroot()
    assert root.tag.endswith("svg")
    assert any(el.tag.endswith("polygon") for el in root)
    bare = emit_forecast_plot_data(hist, np.ones(4), tmp_path / "g.csv")
    tail = list(csv.DictReader(open(bare)))[-4:]
    assert all(r["lower"] == "" and r["upper"] == "" for r in tail)


def test_cli_exit_codes(tmp_path, capsys):
    assert cli.main(["version"]) == 0
    assert capsys.readouterr().out.strip() == "0.1.0"
    with pytest.raises(SystemExit) as info:
        cli.main(["benchmark", "--bogus"])
    assert info.value.code == 1
    assert cli.main(["fit", "--data", str(tmp_path / "none.csv")]) == 2
    p = _series_csv(tmp_path / "s.csv", list(range(6)))
    assert cli.main(["fit", "--data", str(p), "--frequency", "quarterly", "--model", "arima"]) == 2
    assert cli.main(["benchmark", "--models", "arima,xgboost", "--data", f"s={p}:quarterly"]) == 1


def test_cli_estimation_error_exit_code(tmp_path, monkeypatch):
    from parnn.errors import EstimationError

    def boom(*a, **k):
        raise EstimationError("no convergence")

    monkeypatch.setattr(cli, "auto_arima", boom)
    p = _series_csv(tmp_path / "s.csv", ar_process(60, 0.5, 1, mean=5.0))
    assert cli.main(["fit", "--data", str(p), "--frequency", "quarterly", "--model", "arima"]) == 3


def test_cli_config_and_flag_precedence(tmp_path):
    p = _series_csv(tmp_path / "s.csv", ar_process(60, 0.5, 1, mean=5.0))
    conf = _write(tmp_path / "c.ini", "[parnn]\nreps = 2\nsearch_reps = 2\ngrid_max = 1\n"
                  "epochs = 50\nmodels = arima\nout = " + str(tmp_path / "from_config") + "\n")
    args = ["--config", str(conf), "benchmark", "--data", f"s={p}:quarterly", "--paths", "20"]
    assert cli.main(args) == 0
    assert (tmp_path / "from_config" / "report.csv").is_file()
    assert cli.main(args + ["--out", str(tmp_path / "from_flag"), "--models", "arima,arnn"]) == 0
    rows = list(csv.DictReader(open(tmp_path / "from_flag" / "report.csv")))
    assert [r["model"] for r in rows] == ["arima", "arnn"]
    bad = _write(tmp_path / "bad.ini", "[parnn]\nwat = 1\n")
    assert cli.main(["--config", str(bad), "version"]) == 0
    assert cli.main(["--config", str(bad), "ergodicity", "--steps", "10", "--reps", "1"]) == 1


def test_cli_forecast_and_ergodicity(tmp_path):
    p = _series_csv(tmp_path / "s.csv", ar_process(60, 0.5, 2, mean=5.0))
    out = tmp_path / "fc.csv"
    rc = cli.main(["forecast", "--data", str(p), "--horizon", "3", "--reps", "2", "--grid-max", "1",
                   "--search-reps", "2", "--epochs", "50", "--paths", "30", "--out", str(out), "--svg"])
    assert rc == 0
    rows = list(csv.DictReader(open(out)))
    assert len(rows) == 63 and rows[-1]["lower"] != ""
    assert out.with_suffix(".svg").is_file()
    ec = tmp_path / "e.csv"
    assert cli.main(["ergodicity", "--psi1-grid", "0.5,1.5", "--steps", "300", "--reps", "2",
                     "--out", str(ec)]) == 0
    assert len(list(csv.DictReader(open(ec)))) == 4
