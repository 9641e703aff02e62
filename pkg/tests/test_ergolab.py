import csv
import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from parnn.ergolab import (EXPLOSION, Parnn11Weights, coupling_diagnostic, simulate,
                           stationarity_sweep, step, write_sweep_csv)

SAFE = Parnn11Weights(psi2=0.3, nu=0.1, betas=[0.5, -0.3], phis1=[0.4, 0.3],
                      phis2=[0.2, -0.1], mus=[0.1, -0.2])


def test_step_examples():
    assert step(Parnn11Weights(), 0.0, 0.0, 0.0) == (0.0, 0.0)
    assert step(Parnn11Weights(psi1=1.0), 3.7, 0.0, 0.0) == (3.7, 0.0)
    sat = Parnn11Weights(betas=[1.0], phis1=[1.0])
    assert step(sat, 1e6, 0.0, 0.0)[0] == pytest.approx(1.0)
    assert step(sat, -1e6, 0.0, 0.0)[0] == pytest.approx(0.0, abs=1e-12)
    assert step(sat, 0.0, 0.0, 0.25) == (0.75, 0.25)


@given(st.floats(-1e6, 1e6), st.floats(-1e6, 1e6), st.integers(0, 2**32 - 1))
def test_nonlinear_part_bounded(y, e, seed):
    rng = np.random.default_rng(seed)
    k = int(rng.integers(1, 5))
    w = Parnn11Weights(psi1=rng.normal(), psi2=rng.normal(), nu=rng.normal(),
                       betas=rng.normal(size=k) * 3, phis1=rng.normal(size=k) * 3,
                       phis2=rng.normal(size=k) * 3, mus=rng.normal(size=k))
    out, _ = step(w, y, e, 0.0)
    linear = w.psi1 * y + w.psi2 * e + w.nu
    assert abs(out - linear) <= np.abs(w.betas).sum() * (1 + 1e-12) + 1e-9 * (1 + abs(linear))


def test_noiseless_geometric_decay():
    w = Parnn11Weights(psi1=0.8)
    traj = simulate(w, 50, None, 2.0, innovations=np.zeros(50))
    assert np.allclose(traj.y, 2.0 * 0.8 ** np.arange(51), rtol=1e-14, atol=0)
    assert traj.states.shape == (51, 2)


def test_simulation_deterministic():
    a, b = simulate(SAFE, 300, 9, 1.0), simulate(SAFE, 300, 9, 1.0)
    assert np.array_equal(a.states, b.states)


def test_explosion_before_2000_steps():
    w = Parnn11Weights(psi1=1.5)
    traj = simulate(w, 2000, None, 1.0, innovations=np.zeros(2000))
    assert traj.exploded
    last = traj.y.size - 1
    assert abs(traj.y[-1]) <= EXPLOSION < 1.5 ** (last + 1)
    # 1.5**t first exceeds 1e300 at t = 1704
    assert last + 1 == math.ceil(300 / math.log10(1.5)) == 1704


def test_coupling_contraction_with_decay_rate():
    w = Parnn11Weights(psi1=0.5, betas=[0.4], phis1=[0.5], phis2=[0.1], mus=[0.0])
    assert w.lipschitz_y() < 1
    res = coupling_diagnostic(w, 400, 3, 0.0, 10.0)
    assert res.converged and not res.exploded
    assert res.decay_rate <= math.log(0.5) + 0.1


def test_coupling_one_step_when_memoryless():
    res = coupling_diagnostic(Parnn11Weights(psi2=0.7, nu=1.0), 200, 0, 0.0, 10.0)
    assert res.gap_series[0] == 10.0
    assert np.all(res.gap_series[1:] == 0.0)
    assert res.first_meeting_index == 1 and res.converged


def test_coupling_linear_divergence():
    res = coupling_diagnostic(Parnn11Weights(psi1=1.5), 500, 0, 0.0, 10.0)
    assert not res.converged
    g = res.gap_series
    assert np.all(np.diff(g) > 0)


@given(st.floats(-0.99, 0.99).filter(lambda v: abs(v) > 0.05), st.integers(0, 1000))
def test_linear_gap_is_exactly_geometric(psi1, seed):
    res = coupling_diagnostic(Parnn11Weights(psi1=psi1, psi2=0.4), 60, seed, 0.0, 10.0)
    expect = 10.0 * abs(psi1) ** np.arange(61)
    assert np.allclose(res.gap_series, expect, rtol=1e-9, atol=1e-12)


def test_sweep_boundary_and_csv(tmp_path):
    rows, summary = stationarity_sweep(SAFE, [0.2, 0.5, 0.9], n=2000, reps=4)
    assert [s.converged_fraction for s in summary] == [1.0, 1.0, 1.0]
    assert all(s.contraction_certified for s in summary)
    rows_lin, summary_lin = stationarity_sweep(Parnn11Weights(), [1.5], n=2000, reps=4)
    assert summary_lin[0].explosion_fraction == 1.0
    path = write_sweep_csv(rows + rows_lin, tmp_path / "sweep.csv")
    with path.open() as fh:
        got = list(csv.DictReader(fh))
    assert list(got[0]) == ["psi1", "seed", "converged", "explosion", "decay_rate", "mean", "variance"]
    assert len(got) == 16


def test_sweep_psi_zero_mean_matches_one_step_monte_carlo():
    w = Parnn11Weights(psi2=0.5, nu=0.3, betas=[1.2, -0.7], phis1=[0.0, 0.0],
                       phis2=[1.0, -2.0], mus=[0.5, 0.1])
    _, summary = stationarity_sweep(w, [0.0], n=4000, reps=1, seed=5)
    # with psi1 = 0 and no y-dependence, y_t is a function of (eps_{t-1}, eps_t) only
    eps = np.random.default_rng(99).standard_normal(400_001)
    pushed = w.psi2 * eps[:-1] + w.nu + w.nonlinear(np.zeros(eps.size - 1), eps[:-1]) + eps[1:]
    c = pushed - pushed.mean()
    # one-dependent sequence: long-run variance is gamma0 + 2 gamma1
    lrv = c @ c / c.size + 2 * (c[1:] @ c[:-1]) / c.size
    se = math.sqrt(lrv / 2000)
    assert abs(summary[0].mean - pushed.mean()) <= 3 * se
