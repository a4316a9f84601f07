'''
Long-running reference checks. Run with ``pytest -m slow``.
'''

import math

import numpy as np
import pytest

from ldpcert import ensemble, mbios, overall_bound, bound_sweep, run_algorithm1, xi, ExperimentConfig, GridConfig


@pytest.mark.slow
def test_bound_n1000_gamma20():
    table = ensemble(1000, 3, 4).avg_distance_spectrum()
    bound = overall_bound(0.0, 20, mbios.bsc(0.14), table, workers=-1)
    # Reference value is about 3e-5; allow an order of magnitude
    assert bound.total <= math.log(3e-4)
    assert bound.total > float('-inf')


@pytest.mark.slow
def test_sweep_ordering():
    grid = GridConfig(n_lambda=12, n_rho=8, refine_rounds=2)
    p_grid = [0.06, 0.08, 0.10, 0.12, 0.14]
    deltas = [0.0, 5.0, 10.0, 20.0]
    df = bound_sweep(ensemble(1000, 3, 4), p_grid, deltas, 20, grid=grid, workers=-1)
    assert len(df) == len(p_grid) * len(deltas)

    for p, part in df.groupby('p'):
        vals = part.sort_values('delta')['ln_bound'].to_numpy()
        assert np.all(np.diff(vals) >= -1e-9), p
    for delta, part in df.groupby('delta'):
        vals = part.sort_values('p')['ln_bound'].to_numpy()
        assert np.all(np.diff(vals) >= -1e-9), delta


@pytest.mark.slow
def test_certification_run_n100():
    base = dict(n_vars=100, channel='bsc:0.08', gamma=2, trials=200, master_seed=1, with_bound=True)
    single = run_algorithm1(ExperimentConfig(workers=1, **base), verbose=False)
    many = run_algorithm1(ExperimentConfig(workers=8, **base), verbose=False)

    assert single.failures == many.failures
    assert [r.failed for r in single.records] == [r.failed for r in many.records]
    assert single.status == 'ok'
    assert single.epsilon < 0.5
    assert single.log2_confidence_deficit == pytest.approx(xi(200, failures=single.failures))
    assert single.ln_bound <= 0.0
