import json

import pandas as pd
import pytest

from ldpcert import tanner
from ldpcert.cli import main, parse_args


def test_sample_writes_alist(tmp_path):
    out = tmp_path / 'codes' / 'c.alist'
    assert main(['sample', '-n', '1000', '-c', '3', '-d', '4', '-s', '7', '-o', str(out)]) == 0
    code = tanner.from_alist(str(out))
    assert code.n_vars == 1000 and code.n_checks == 750
    echo = json.loads((tmp_path / 'codes' / 'c.alist.config.json').read_text())
    assert echo['seed'] == 7


def test_bad_degrees_exit_code(tmp_path, capsys):
    assert main(['sample', '-n', '100', '-c', '3', '-d', '7', '-o', str(tmp_path / 'x.alist')]) == 1
    assert 'ERROR' in capsys.readouterr().err


def test_decode_noiseless(tmp_path, capsys):
    alist = str(tmp_path / 'c.alist')
    assert main(['sample', '-n', '40', '-s', '2', '-o', alist]) == 0
    capsys.readouterr()

    first = tmp_path / 'v1.json'
    second = tmp_path / 'v2.json'
    for path in (first, second):
        assert main(['decode', '-a', alist, '--channel', 'bsc:1e-9', '-s', '5', '-o', str(path)]) == 0
    v1 = json.loads(first.read_text())
    v2 = json.loads(second.read_text())
    assert v1['holds'] and v1['ml_certificate']
    assert v1 == v2


def test_decode_missing_alist(tmp_path):
    assert main(['decode', '-a', str(tmp_path / 'none.alist')]) == 1


def test_mindist_lb(tmp_path, capsys, cycle_code):
    alist = str(tmp_path / 'cycle.alist')
    cycle_code.write_alist(alist)
    assert main(['mindist-lb', '-a', alist, '--exact']) == 0
    out = capsys.readouterr().out
    report = json.loads(out[out.index('{'):])
    assert report['lb'] == 3
    assert report['d_min'] == 3


def test_spectrum(tmp_path):
    out = tmp_path / 's.csv'
    assert main(['spectrum', '-n', '40', '-g', '4', '-o', str(out)]) == 0
    df = pd.read_csv(out)
    assert list(df.columns) == ['h', 'ln_avg_Ah', 'zero_flag']
    assert len(df) == 41


class TestConfigPrecedence:

    def test_file_overrides_defaults(self, tmp_path):
        cfg = tmp_path / 'run.json'
        cfg.write_text(json.dumps({'trials': 30, 'gamma': 1, 'channel': 'bsc:0.05'}))
        args = parse_args(['--config', str(cfg), 'confidence', '-o', 'r.json'])
        assert args.trials == 30 and args.gamma == 1 and args.channel == 'bsc:0.05'
        assert args.n_vars == 100

    def test_flags_override_file(self, tmp_path):
        cfg = tmp_path / 'run.json'
        cfg.write_text(json.dumps({'trials': 30, 'gamma': 1}))
        args = parse_args(['--config', str(cfg), 'confidence', '-L', '50', '-o', 'r.json'])
        assert args.trials == 50 and args.gamma == 1

    def test_long_preset(self, tmp_path):
        args = parse_args(['confidence', '--long', '-o', 'r.json'])
        assert (args.n_vars, args.trials, args.gamma, args.channel) == (1000, 600, 20, 'bsc:0.14')
        cfg = tmp_path / 'run.json'
        cfg.write_text(json.dumps({'trials': 150}))
        args = parse_args(['--config', str(cfg), 'confidence', '--long', '-o', 'r.json'])
        assert args.trials == 150 and args.n_vars == 1000

    def test_missing_config_file(self, tmp_path):
        with pytest.raises(AssertionError):
            parse_args(['--config', str(tmp_path / 'nope.json'), 'confidence', '-o', 'r.json'])


def test_confidence_error_status_exits_zero(tmp_path):
    out = tmp_path / 'r.json'
    log = tmp_path / 't.csv'
    argv = ['confidence', '-n', '40', '--channel', 'bsc:0.4', '-g', '0', '-L', '10', '-w', '1',
            '--no-bound', '-o', str(out), '--trial-log', str(log)]
    assert main(argv) == 0
    report = json.loads(out.read_text())
    assert report['status'] == 'error'
    assert report['log2_confidence_deficit'] is None
    assert len(pd.read_csv(log)) == 10


def test_fer(tmp_path):
    out = tmp_path / 'fer.json'
    assert main(['fer', '-n', '40', '--channel', 'bsc:1e-9', '-f', '4', '-w', '1', '-o', str(out)]) == 0
    assert json.loads(out.read_text())['frame_errors'] == 0


def test_bound_sweep(tmp_path):
    out = tmp_path / 'fig.csv'
    argv = ['bound', '-n', '40', '-g', '2', '--p-grid', '0.05,0.1', '--deltas', '0,2', '-w', '1',
            '--n-lambda', '8', '--n-rho', '5', '--refine-rounds', '1', '-o', str(out)]
    assert main(argv) == 0
    df = pd.read_csv(out)
    assert len(df) == 4
    assert (df['ln_bound'] <= 0).all()


@pytest.mark.parametrize('p_grid,deltas', [('0.06,1.5', '0,2'), ('0.06,0.1', '0,-2')])
def test_bound_rejects_bad_grid_before_sweeping(tmp_path, capsys, p_grid, deltas):
    out = tmp_path / 'fig.csv'
    argv = ['bound', '-n', '1000', '-g', '20', '--p-grid', p_grid, '--deltas', deltas, '-w', '1', '-o', str(out)]
    assert main(argv) == 1
    captured = capsys.readouterr()
    assert 'Sweeping' not in captured.out
    assert 'ERROR' in captured.err
    assert not out.exists()
