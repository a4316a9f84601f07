'''
Command line front end: ``ldpcert <subcommand> [flags]``.

Defaults come from the optional JSON file given with ``--config``; flags on
the command line override it. The default worker count is read from the
LDPCERT_WORKERS environment variable.
'''

import argparse
import json
import os
import sys

from .cert_utils import default_workers
from .confidence import ExperimentConfig
from .converter import cmd_sample, cmd_spectrum, cmd_decode, cmd_bound, cmd_confidence, cmd_mindist_lb, cmd_fer
from .ds2_class import GridConfig
from .lp_class import SolverError
from .version import __version__

LONG_DEFAULTS = {'n_vars': 1000, 'var_degree': 3, 'check_degree': 4, 'channel': 'bsc:0.14',
                 'delta': 0.0, 'gamma': 20, 'trials': 600}


def _floatList(text):
    try:
        return [float(v) for v in str(text).split(',') if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError("expected comma separated numbers, got {}".format(text))


def _addEnsemble(p):
    p.add_argument('-n', '--n-vars', dest='n_vars', type=int, default=100, help='block length N')
    p.add_argument('-c', '--var-degree', dest='var_degree', type=int, default=3, help='variable degree c')
    p.add_argument('-d', '--check-degree', dest='check_degree', type=int, default=4, help='check degree d')


def _addDecoder(p):
    p.add_argument('--bp-max-iters', dest='bp_max_iters', type=int, default=100)
    p.add_argument('--lp-mode', dest='lp_mode', choices=['explicit', 'adaptive'], default='explicit')
    p.add_argument('--lp-gap-tol', dest='lp_gap_tol', type=float, default=1e-7)


def _addGrid(p):
    p.add_argument('--n-lambda', dest='n_lambda', type=int, default=GridConfig.n_lambda)
    p.add_argument('--n-rho', dest='n_rho', type=int, default=GridConfig.n_rho)
    p.add_argument('--refine-rounds', dest='refine_rounds', type=int, default=GridConfig.refine_rounds)


def build_parser():
    parser = argparse.ArgumentParser(prog='ldpcert',
                                     description='Certified error-floor bounds for LDPC ensembles')
    parser.add_argument('--version', action='version', version='%(prog)s {}'.format(__version__))
    parser.add_argument('--config', metavar='FILENAME', help='JSON file with default flag values')
    sub = parser.add_subparsers(dest='command')
    sub.required = True

    p = sub.add_parser('sample', help='sample a (c,d)-regular code and write it as alist')
    _addEnsemble(p)
    p.add_argument('-s', '--seed', type=int, default=0)
    p.add_argument('-o', '--output', required=True, help='alist file to write')
    p.add_argument('--with-lb', dest='with_lb', action='store_true', help='also print LB(C)')
    p.add_argument('--no-resample', dest='resample', action='store_false',
                   help='keep the mod-2 collapsed configuration-model graph')

    p = sub.add_parser('spectrum', help='ensemble-average distance spectrum as CSV')
    _addEnsemble(p)
    p.add_argument('-g', '--gamma', type=int, default=None, help='expurgation depth')
    p.add_argument('--no-doubling', dest='doubling', action='store_false')
    p.add_argument('-o', '--output', required=True)

    p = sub.add_parser('decode', help='one BP/LP decode and certificate test')
    p.add_argument('-a', '--alist', required=True)
    p.add_argument('--channel', default='bsc:0.08', help='bsc:<p>, awgn:<sigma>:<levels> or a channel CSV')
    p.add_argument('-s', '--seed', type=int, default=0)
    p.add_argument('--delta', type=float, default=0.0)
    _addDecoder(p)
    p.add_argument('-o', '--output', default=None, help='JSON verdict file')
    p.add_argument('--lambda-csv', dest='lambda_csv', default=None, help='write the LP solution as CSV')

    p = sub.add_parser('bound', help='(p, delta, ln_bound) over a BSC grid')
    _addEnsemble(p)
    p.add_argument('-g', '--gamma', type=int, default=20)
    p.add_argument('--p-grid', dest='p_grid', type=_floatList, default=[0.06, 0.08, 0.10, 0.12, 0.14])
    p.add_argument('--deltas', type=_floatList, default=[0.0, 5.0, 10.0, 20.0])
    p.add_argument('-w', '--workers', type=int, default=default_workers())
    _addGrid(p)
    p.add_argument('-o', '--output', required=True)
    p.add_argument('--table-csv', dest='table_csv', default=None,
                   help='per-weight table for the last (p, delta)')

    p = sub.add_parser('confidence', help='Monte Carlo certification run')
    _addEnsemble(p)
    p.add_argument('--channel', default='bsc:0.08')
    p.add_argument('--delta', type=float, default=0.0)
    p.add_argument('-g', '--gamma', type=int, default=2)
    p.add_argument('-L', '--trials', type=int, default=200)
    p.add_argument('-s', '--seed', dest='master_seed', type=int, default=0)
    p.add_argument('-w', '--workers', type=int, default=default_workers())
    _addDecoder(p)
    _addGrid(p)
    p.add_argument('--no-bound', dest='with_bound', action='store_false')
    p.add_argument('--long', action='store_true', help='N=1000, L=600, gamma=20, BSC 0.14 preset')
    p.add_argument('-o', '--output', required=True, help='JSON report')
    p.add_argument('--trial-log', dest='trial_log', default=None)
    p.add_argument('--table-csv', dest='table_csv', default=None)

    p = sub.add_parser('mindist-lb', help='fractional-distance lower bound of a stored code')
    p.add_argument('-a', '--alist', required=True)
    p.add_argument('--exact', action='store_true', help='also enumerate d_min (small codes)')

    p = sub.add_parser('fer', help='plain BP frame error rate over the ensemble')
    _addEnsemble(p)
    p.add_argument('--channel', default='bsc:0.08')
    p.add_argument('-f', '--frames', type=int, default=1000)
    p.add_argument('-s', '--seed', type=int, default=0)
    p.add_argument('--bp-max-iters', dest='bp_max_iters', type=int, default=100)
    p.add_argument('-w', '--workers', type=int, default=default_workers())
    p.add_argument('-o', '--output', required=True)
    p.add_argument('--frame-log', dest='frame_log', default=None)

    return parser, sub


def _loadConfig(path):
    assert os.path.isfile(path), "{} does not exist.".format(path)
    with open(path, 'r') as f:
        values = json.load(f)
    if not isinstance(values, dict):
        raise ValueError("invalid-spec: config file must hold a JSON object")
    return {k.replace('-', '_'): v for k, v in values.items()}


def parse_args(argv=None):
    '''
    Parse with precedence flags > --config file > --long preset > built-in
    defaults.
    '''
    argv = list(sys.argv[1:] if argv is None else argv)
    parser, sub = build_parser()

    pre = argparse.ArgumentParser(add_help=False)
    pre.add_argument('--config')
    known, _ = pre.parse_known_args(argv)

    command = next((a for a in argv if a in sub.choices), None)
    if command is not None:
        sp = sub.choices[command]
        if command == 'confidence' and '--long' in argv:
            sp.set_defaults(**LONG_DEFAULTS)
        if known.config:
            sp.set_defaults(**_loadConfig(known.config))

    return parser.parse_args(argv)


def _grid(args):
    return GridConfig(n_lambda=args.n_lambda, n_rho=args.n_rho, refine_rounds=args.refine_rounds)


def run(args):
    if args.command == 'sample':
        cmd_sample(args.n_vars, args.var_degree, args.check_degree, args.seed, args.output,
                   with_lb=args.with_lb, resample=args.resample)

    elif args.command == 'spectrum':
        cmd_spectrum(args.n_vars, args.var_degree, args.check_degree, args.output,
                     gamma=args.gamma, doubling=args.doubling)

    elif args.command == 'decode':
        report = cmd_decode(args.alist, args.channel, args.seed, delta=args.delta,
                            bp_max_iters=args.bp_max_iters, lp_mode=args.lp_mode,
                            lp_gap_tol=args.lp_gap_tol, output=args.output, lambda_csv=args.lambda_csv)
        print(json.dumps(report, indent=2))

    elif args.command == 'bound':
        cmd_bound(args.n_vars, args.var_degree, args.check_degree, args.gamma, args.p_grid, args.deltas,
                  args.output, workers=args.workers, grid=_grid(args), table_csv=args.table_csv)

    elif args.command == 'confidence':
        fields = dict(n_vars=args.n_vars, var_degree=args.var_degree, check_degree=args.check_degree,
                      channel=args.channel, delta=args.delta, gamma=args.gamma, trials=args.trials,
                      master_seed=args.master_seed, bp_max_iters=args.bp_max_iters, lp_mode=args.lp_mode,
                      lp_gap_tol=args.lp_gap_tol, workers=args.workers, with_bound=args.with_bound,
                      grid=_grid(args))
        cfg = ExperimentConfig(**fields)
        cmd_confidence(cfg, args.output, trial_log=args.trial_log, table_csv=args.table_csv)

    elif args.command == 'mindist-lb':
        print(json.dumps(cmd_mindist_lb(args.alist, exact=args.exact), indent=2))

    elif args.command == 'fer':
        cmd_fer(args.n_vars, args.var_degree, args.check_degree, args.channel, args.frames, args.seed,
                args.output, bp_max_iters=args.bp_max_iters, workers=args.workers, frame_log=args.frame_log)


def main(argv=None):
    '''Exit status 0 when the computation completed, 1 on a reported error.'''
    args = parse_args(argv)
    try:
        run(args)
    except (ValueError, AssertionError, SolverError, RuntimeError, OSError) as e:
        print("ERROR: {}".format(e), file=sys.stderr)
        return 1
    return 0


if __name__ == '__main__':
    sys.exit(main())
