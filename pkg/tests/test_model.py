import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from oracles import TABLE_II
from parnn.arima import auto_arima
from parnn.errors import SearchError, SizingError
from parnn.model import (ParnnConfig, ParnnModel, Standardizer, build_training_pairs, extend,
                         fit_arnn, fit_fixed, fit_parnn, forecast_recursive, grid_search,
                         hidden_size)
from parnn.neuralnet import NetworkWeights, TrainConfig, forward, init_network
from parnn.series import BoxCoxParam, TimeSeries
from parnn.synthetic import ar_process

FAST = ParnnConfig(max_p=2, max_q=2, reps=8, search_reps=4, train_cfg=TrainConfig(epochs=300))


@pytest.mark.parametrize("p, q, k", [(10, 6, 9), (1, 10, 6), (3, 3, 4), (1, 1, 2), (2, 2, 3)])
def test_hidden_size_examples(p, q, k):
    assert hidden_size(p, q) == k


def test_hidden_size_table_spot_checks():
    for key in [("AMZN", "short"), ("MSFT", "short"), ("GOOG", "short"), ("US-EPU", "medium")]:
        p, k, q = TABLE_II[key]
        assert hidden_size(p, q) == k


@given(st.integers(1, 50), st.integers(1, 50))
def test_hidden_size_is_round_half_up(p, q):
    k = hidden_size(p, q)
    assert k - 0.5 <= (p + q + 1) / 2 < k + 0.5


def test_training_pairs():
    X, t = build_training_pairs([1, 2, 3, 4], [0, 0, 0, 0], 2, 1)
    assert X.tolist() == [[2, 1, 0], [3, 2, 0]] and t.tolist() == [3, 4]
    X, t = build_training_pairs([1, 2], [0.5, -0.5], 1, 1)
    assert X.tolist() == [[1, 0.5]] and t.tolist() == [2]
    with pytest.raises(ValueError):
        build_training_pairs([1, 2, 3], [0, 0, 0], 1, 0)
    with pytest.raises(SizingError):
        build_training_pairs([1, 2, 3], [0, 0], 1, 1)


def test_fit_fixed_deterministic_and_shapes():
    y = ar_process(150, 0.6, 1, mean=5.0)
    cfg = ParnnConfig(reps=1, train_cfg=TrainConfig(epochs=200))
    a, b = fit_fixed(y, 2, 1, cfg), fit_fixed(y, 2, 1, cfg)
    assert np.array_equal(a.ensemble[0].flat(), b.ensemble[0].flat())
    assert np.array_equal(forecast_recursive(a, 5), forecast_recursive(b, 5))
    assert a.pkq == (2, 2, 1) and a.residual_sigma > 0
    assert all(n.n_inputs == 3 and n.k == 2 for n in a.ensemble)


def test_fit_fixed_no_worse_than_arima_in_sample():
    y = ar_process(400, 0.7, 2, mean=20.0)
    arima = auto_arima(y)
    m = fit_fixed(y, 1, 1, ParnnConfig(reps=10), arima=arima)
    std = m.standardization
    X, t = build_training_pairs(std.y(y), std.e(arima.residuals.values), 1, 1)
    pred = std.y_inv(m.stack.mean_predict(X))
    mse_parnn = np.mean((y[1:] - pred) ** 2)
    mse_arima = np.mean(arima.residuals.values[1:] ** 2)
    assert mse_parnn <= 1.2 * mse_arima


def test_constant_series_forecast():
    m = fit_fixed(np.full(60, 4.2), 2, 2, ParnnConfig(reps=3))
    assert np.allclose(forecast_recursive(m, 6), 4.2, atol=1e-6, rtol=0)


def _constant_model(c, p=2, q=1, reps=3, y_mean=10.0, y_scale=2.0):
    d = p + q
    k = hidden_size(p, q)
    nets = [NetworkWeights(np.zeros((d, k)), np.zeros(k), np.zeros(k), c) for _ in range(reps)]
    return ParnnModel(None, p, q, k, nets, Standardizer(y_mean, y_scale), 1.0, BoxCoxParam(),
                      np.arange(1.0, 21.0), np.zeros(20))


def test_constant_output_ensemble_forecast():
    m = _constant_model(0.75)
    assert np.allclose(forecast_recursive(m, 4), 10.0 + 2.0 * 0.75)


def test_recursive_forecast_hand_unrolled():
    net = init_network(3, 2, 4, 1.0)
    std = Standardizer(5.0, 2.0, 0.5, 3.0)
    y = np.array([3.0, 7.0, 6.0, 4.0, 8.0])
    e = np.array([0.0, 0.2, -1.0, 0.4, 1.5])
    m = ParnnModel(None, 2, 1, 2, [net], std, 1.0, BoxCoxParam(), y, e)
    z = lambda v: (v - 5.0) / 2.0
    ze = lambda v: (v - 0.5) / 3.0
    f1 = 5.0 + 2.0 * forward(net, [z(8.0), z(4.0), ze(1.5)])
    f2 = 5.0 + 2.0 * forward(net, [z(f1), z(8.0), ze(0.0)])
    out = forecast_recursive(m, 2)
    assert out == pytest.approx([f1, f2], rel=0, abs=1e-12)
    assert forecast_recursive(m, 1)[0] == out[0]


def test_ensemble_mean_permutation_invariant():
    nets = [init_network(3, 2, s, 1.0) for s in range(5)]
    args = (Standardizer(1.0, 1.0), 1.0, BoxCoxParam(), np.linspace(0, 1, 10), np.zeros(10))
    a = ParnnModel(None, 2, 1, 2, nets, *args)
    b = ParnnModel(None, 2, 1, 2, nets[::-1], *args)
    assert np.allclose(forecast_recursive(a, 6), forecast_recursive(b, 6), rtol=0, atol=1e-12)


@given(st.floats(-1e4, 1e4), st.floats(0.01, 100.0))
def test_destandardization_round_trip(shift, scale):
    # identity-like data: the model forecasts its standardized output on the original scale
    m = _constant_model(0.3, y_mean=shift, y_scale=scale)
    assert np.allclose(forecast_recursive(m, 3), shift + scale * 0.3, rtol=1e-12, atol=1e-8)


def test_grid_search_selection_rules():
    y = TimeSeries(np.arange(40.0) % 7)
    val = TimeSeries(np.arange(8.0) % 5)
    assert grid_search(y, val, cells=[(1, 1)], scorer=lambda p, q: 0.5).p == 1
    table = {(1, 2): 0.9, (2, 1): 1.1}
    res = grid_search(y, val, cells=list(table), scorer=lambda p, q: table[(p, q)])
    assert (res.p, res.q) == (1, 2)
    tie = grid_search(y, val, cells=[(3, 2), (2, 3), (4, 4)], scorer=lambda p, q: 1.0)
    assert (tie.p, tie.q) == (2, 3)
    with pytest.raises(SearchError):
        grid_search(TimeSeries(np.arange(3.0)), val, cells=[(5, 5)], scorer=lambda p, q: 1.0)


@given(st.dictionaries(st.tuples(st.integers(1, 6), st.integers(1, 6)),
                       st.floats(0, 10, allow_nan=False), min_size=1))
def test_grid_search_returns_minimum(table):
    y, val = TimeSeries(np.arange(40.0)), TimeSeries(np.arange(4.0))
    res = grid_search(y, val, cells=list(table), scorer=lambda p, q: table[(p, q)])
    assert all(res.mase <= v for v in res.table.values())


def test_fit_parnn_end_to_end_and_no_refit():
    y = TimeSeries(ar_process(120, 0.5, 3, mean=10.0))
    train, val = y.slice(0, 100), y.slice(100)
    model, grid = fit_parnn(train, val, FAST)
    assert model.pkq == (grid.p, hidden_size(grid.p, grid.q), grid.q)
    assert len(model.ensemble) == FAST.reps and model.y_history.size == 120
    strict, _ = fit_parnn(train, val, FAST, refit=False)
    assert strict.y_history.size == 120
    assert strict.arima.history.values.size == 120
    assert np.array_equal(strict.arima.params, auto_arima(train).params)


def test_extend_without_retraining():
    y = ar_process(130, 0.5, 4, mean=3.0)
    m = fit_fixed(y[:100], 1, 1, FAST)
    ext = extend(m, y[100:])
    assert ext.ensemble is m.ensemble
    assert ext.y_history.size == ext.e_history.size == 130


def test_arnn_baseline():
    y = ar_process(200, [0.5, 0.2], 5, mean=2.0)
    m = fit_arnn(y, FAST)
    assert m.q == 0 and m.arima is None and m.k == (m.p + 2) // 2
    assert forecast_recursive(m, 3).shape == (3,)
