import math

import numpy as np
import pytest

from ldpcert import (ensemble, mbios, p1_bound, solve_tilting, optimize_weight, overall_bound,
                     union_bhattacharyya, bound_sweep, Ds2Params, TiltingMeasure, GridConfig)
from ldpcert.ds2_class import kappa_residual, _evaluate


@pytest.fixture(scope='module')
def spec40():
    return ensemble(40, 3, 4).avg_distance_spectrum()


def _kappaByBisection(beta, rho, lam, q0, q1):
    '''Plain-float bisection on kappa - F(kappa) for a finite table.'''
    def f(k):
        num = sum(a * (1 + k * (b / a) ** lam) ** (rho - 1) for a, b in zip(q0, q1))
        den = sum(a * (b / a) ** lam * (1 + k * (b / a) ** lam) ** (rho - 1) for a, b in zip(q0, q1))
        return k - beta / (1 - beta) * num / den
    lo, hi = 0.0, 1.0
    while f(hi) < 0:
        hi *= 2
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if f(mid) < 0:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


class TestP1Bound:

    @pytest.mark.parametrize('lam', [0.1, 0.5, 1.0, 3.0])
    @pytest.mark.parametrize('h', [1, 7, 20])
    def test_rho_one_ignores_tilt(self, h, lam):
        ch = mbios.bsc(0.1)
        params = Ds2Params(lam, 1.0, 0.0, 1.0, h / 40)
        expected = 0.7 * lam + 2.5 + h * math.log(0.9 ** (1 - lam) * 0.1 ** lam + 0.1 ** (1 - lam) * 0.9 ** lam)
        for w in ([0.5, 0.5], [0.9, 0.1], [0.01, 0.99]):
            got = p1_bound(h, params, TiltingMeasure(np.array(w)), 2.5, ch, 0.7, 40)
            assert got == pytest.approx(expected, abs=1e-12)

    def test_bhattacharyya_point(self):
        ch = mbios.bsc(0.14)
        params = Ds2Params(0.5, 1.0, 0.0, 1.0, 0.25)
        got = p1_bound(10, params, TiltingMeasure(np.array([0.5, 0.5])), 3.0, ch, 0.0, 40)
        assert got == pytest.approx(union_bhattacharyya(10, 3.0, ch), abs=1e-12)
        assert union_bhattacharyya(10, 3.0, ch) == pytest.approx(3.0 + 10 * math.log(2 * math.sqrt(0.14 * 0.86)), abs=1e-12)

    def test_zero_marked(self):
        params = Ds2Params(0.5, 1.0, 0.0, 1.0, 0.25)
        assert p1_bound(3, params, TiltingMeasure(np.array([0.5, 0.5])), None, mbios.bsc(0.1), 0.0, 40) is None
        assert union_bhattacharyya(3, None, mbios.bsc(0.1)) is None

    @pytest.mark.parametrize('h,rho,lam', [(0, 0.5, 1.0), (41, 0.5, 1.0), (3, 0.0, 1.0), (3, 1.5, 1.0), (3, 0.5, -1.0)])
    def test_domain(self, h, rho, lam):
        params = Ds2Params(lam, rho, 0.0, 1.0, 0.1)
        with pytest.raises(ValueError, match='domain-error'):
            p1_bound(h, params, TiltingMeasure(np.array([0.5, 0.5])), 1.0, mbios.bsc(0.1), 0.0, 40)


class TestTilting:

    @pytest.mark.parametrize('beta,rho,lam', [(0.02, 0.5, 1.0), (0.3, 0.2, 0.4), (0.9, 0.8, 5.0), (0.5, 1.0, 1.0)])
    def test_fixed_point(self, beta, rho, lam):
        ch = mbios.bsc(0.14)
        psi, params = solve_tilting(beta, rho, lam, ch)
        assert kappa_residual(params.kappa, beta, rho, lam, ch) <= 1e-10
        assert psi.weights.sum() == pytest.approx(1.0, abs=1e-12)
        assert np.all(psi.weights > 0)

    def test_kappa_matches_bisection(self):
        ch = mbios.bsc(0.14)
        _, params = solve_tilting(0.02, 0.5, 1.0, ch)
        ref = _kappaByBisection(0.02, 0.5, 1.0, [0.86, 0.14], [0.14, 0.86])
        assert params.kappa == pytest.approx(ref, abs=1e-8)

    def test_quantized_channel(self):
        ch = mbios.quantized_awgn(0.8, 6)
        psi, params = solve_tilting(0.1, 0.4, 0.7, ch)
        assert kappa_residual(params.kappa, 0.1, 0.4, 0.7, ch) <= 1e-10
        assert len(psi.weights) == 6

    @pytest.mark.parametrize('ch', [mbios.bsc(0.14), mbios.quantized_awgn(0.8, 6)], ids=['bsc', 'awgn6'])
    def test_tilt_is_stationary(self, ch):
        n = 40
        moved = 0
        for h, rho, lam in ((2, 0.5, 1.0), (8, 0.3, 0.4), (16, 0.8, 2.0), (28, 0.6, 5.0), (36, 0.2, 0.7)):
            psi, params = solve_tilting(h / n, rho, lam, ch)
            value = p1_bound(h, params, psi, 3.0, ch, 1.0, n)
            for a in range(len(psi.weights)):
                for b in range(len(psi.weights)):
                    if a == b:
                        continue
                    w = psi.weights.copy()
                    w[a] += 1e-4
                    w[b] -= 1e-4
                    shifted = p1_bound(h, params, TiltingMeasure(w), 3.0, ch, 1.0, n)
                    assert shifted >= value - 1e-6, (h, a, b)
                    moved += 1
        assert moved >= 10

    @pytest.mark.parametrize('beta,rho,lam', [(0.0, 0.5, 1.0), (1.0, 0.5, 1.0), (0.2, 0.0, 1.0), (0.2, 0.5, -0.1)])
    def test_domain(self, beta, rho, lam):
        with pytest.raises(ValueError, match='domain-error'):
            solve_tilting(beta, rho, lam, mbios.bsc(0.1))


class TestOptimizeWeight:

    @pytest.mark.parametrize('h', [2, 6, 12, 20, 40])
    def test_never_worse_than_bhattacharyya(self, spec40, h):
        ch = mbios.bsc(0.08)
        value, params = optimize_weight(h, spec40.log_count(h), ch, 0.0, 40)
        assert value <= union_bhattacharyya(h, spec40.log_count(h), ch) + 1e-12
        assert 0.0 < params.rho <= 1.0
        assert params.lambda_w >= 0.0

    def test_zero_marked(self, spec40):
        assert optimize_weight(3, spec40.log_count(3), mbios.bsc(0.08), 0.0, 40) == (None, None)

    def test_monotone_in_delta(self, spec40):
        ch = mbios.bsc(0.1)
        for h in (4, 16, 30):
            vals = [optimize_weight(h, spec40.log_count(h), ch, d, 40)[0] for d in (0.0, 1.0, 5.0, 20.0)]
            assert all(b >= a - 1e-6 for a, b in zip(vals, vals[1:]))

    def test_stationary(self, spec40):
        ch = mbios.bsc(0.08)
        grid = GridConfig(refine_rounds=8)
        for h in (4, 10, 20, 30, 38):
            for delta in (0.0, 2.0):
                value, params = optimize_weight(h, spec40.log_count(h), ch, delta, 40, grid)
                r, l = params.rho, params.lambda_w
                rho = np.array([r, r, min(1.0, r + 1e-4), r - 1e-4])
                lam = np.array([l + 1e-4, max(0.0, l - 1e-4), l, l])
                vals, _, _ = _evaluate(h, 40, spec40.log_count(h), delta, rho, lam, ch, grid)
                assert vals.min() >= value - 1e-6

    def test_grid_resolution(self, spec40):
        ch = mbios.bsc(0.1)
        fine = GridConfig(n_lambda=50, n_rho=40)
        for h in (6, 14, 26):
            a, _ = optimize_weight(h, spec40.log_count(h), ch, 1.0, 40)
            b, _ = optimize_weight(h, spec40.log_count(h), ch, 1.0, 40, fine)
            assert abs(a - b) <= 0.01 * max(1.0, abs(a))


class _NoSpectrum(object):

    def avg_distance_spectrum(self):
        raise AssertionError("spectrum computed before the grid was checked")


class TestBoundSweep:

    def test_bad_crossover_fails_first(self):
        with pytest.raises(ValueError, match='invalid-spec'):
            bound_sweep(_NoSpectrum(), [0.06, 0.1, 1.5], [0.0], 2)

    def test_negative_delta_fails_first(self):
        with pytest.raises(ValueError, match='domain-error'):
            bound_sweep(_NoSpectrum(), [0.06], [0.0, 5.0, -1.0], 2)

    def test_negative_gamma_fails_first(self):
        with pytest.raises(ValueError, match='invalid-spec'):
            bound_sweep(_NoSpectrum(), [0.06], [0.0], -1)

    def test_small_sweep(self):
        grid = GridConfig(n_lambda=8, n_rho=5, refine_rounds=1)
        df = bound_sweep(ensemble(40, 3, 4), [0.05, 0.1], [0.0, 2.0], 2, grid=grid)
        assert list(df.columns) == ['p', 'delta', 'ln_bound']
        assert len(df) == 4


class TestOverallBound:

    def test_capped_and_monotone_in_gamma(self, spec40):
        ch = mbios.bsc(0.06)
        totals = [overall_bound(0.0, g, ch, spec40).total for g in (0, 2, 4, 8)]
        assert all(t <= 0.0 for t in totals)
        assert all(b <= a + 1e-12 for a, b in zip(totals, totals[1:]))

    def test_table_rows(self, spec40, tmp_path):
        table = overall_bound(0.0, 4, mbios.bsc(0.06), spec40)
        df = table.to_dataframe()
        assert len(df) == 41
        assert df.iloc[-1]['h'] == 'total'
        # expurgated and odd weights carry no term
        assert np.isnan(table.ln_p1(4))
        assert np.isnan(table.ln_p1(7))
        assert np.isfinite(table.ln_p1(6))
        table.to_csv(str(tmp_path / 'b.csv'))
        assert table.to_dict()['gamma'] == 4

    def test_workers_agree(self, spec40):
        ch = mbios.bsc(0.08)
        a = overall_bound(1.0, 2, ch, spec40, workers=1)
        b = overall_bound(1.0, 2, ch, spec40, workers=2)
        assert a.total == b.total

    def test_everything_expurgated(self, spec40):
        assert overall_bound(0.0, 40, mbios.bsc(0.1), spec40).total == float('-inf')

    def test_invalid(self, spec40):
        with pytest.raises(ValueError):
            overall_bound(0.0, -1, mbios.bsc(0.1), spec40)
        with pytest.raises(ValueError, match='domain-error'):
            overall_bound(-1.0, 2, mbios.bsc(0.1), spec40)
