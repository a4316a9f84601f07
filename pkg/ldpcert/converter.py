'''
Pipeline entry points behind the ldpcert command line.

Each function takes plain arguments, runs one stage end to end, writes its
artefacts and echoes the effective configuration next to them.
'''

import os
import time

import numpy as np

from .amlc import amlc_check
from .bp_class import bp_decode
from .cert_utils import CSV_FLOAT_FORMAT, write_config_echo, write_json, to_jsonable
from .channel_class import channel_from_spec
from .code_class import ensemble, tanner, exhaustive_min_distance
from .confidence import run_algorithm1, run_fer_simulation
from .ds2_class import GridConfig, bound_sweep, overall_bound, sweep_channels
from .lp_class import lp_decode, ml_certificate, min_distance_lb, fractional_distance


def _makeParent(path):
    parent = os.path.dirname(os.path.abspath(path))
    if not os.path.exists(parent):
        os.makedirs(parent)


# =========================================================
# Codes
# =========================================================

def cmd_sample(n_vars: int, var_degree: int, check_degree: int, seed: int, output: str,
               with_lb: bool=False, resample: bool=True):
    '''
    Sample a (c,d)-regular code and write it as alist.

    Returns the code and, with ``with_lb``, its minimum-distance lower bound.
    '''
    spec = ensemble(n_vars, var_degree, check_degree)

    start_time = time.time()
    print("\nSampling {} with seed {}...".format(spec, seed))
    code = spec.sample_regular_code(seed, resample=resample)
    if code.resamples:
        print("Rejected draws with repeated edges: {}".format(code.resamples))

    _makeParent(output)
    code.write_alist(output)
    print(output)

    config = {'subcommand': 'sample', 'ensemble': spec.to_dict(), 'seed': int(seed),
              'resample': bool(resample), 'resamples': int(code.resamples)}

    lb = None
    if with_lb:
        print("\nComputing minimum distance lower bound...")
        lb = min_distance_lb(code)
        print("LB(C) = {}".format(lb))
        config['lb'] = int(lb)

    write_config_echo(output, config)

    print("\nDone!")
    print("Time (s):", round(time.time() - start_time, ndigits=1))
    return code, lb


def cmd_spectrum(n_vars: int, var_degree: int, check_degree: int, output: str,
                 gamma: int=None, doubling: bool=True):
    '''Average distance spectrum CSV (h, ln_avg_Ah, zero_flag), optionally expurgated.'''
    spec = ensemble(n_vars, var_degree, check_degree)

    start_time = time.time()
    print("\nComputing average distance spectrum of {}...".format(spec))
    table = spec.avg_distance_spectrum()
    if gamma is not None:
        table = table.expurgate(gamma, doubling=doubling)

    _makeParent(output)
    table.to_csv(output)
    write_config_echo(output, {'subcommand': 'spectrum', 'ensemble': spec.to_dict(),
                               'gamma': gamma, 'doubling': bool(doubling)})
    print(output)

    print("\nDone!")
    print("Time (s):", round(time.time() - start_time, ndigits=1))
    return table


def cmd_mindist_lb(alist: str, exact: bool=False):
    '''Fractional distance and LB(C) of a stored code; exhaustive d_min for tiny codes.'''
    code = tanner.from_alist(alist)

    start_time = time.time()
    print("\nComputing fractional distance of {}...".format(code))
    frac = fractional_distance(code)
    lb = min_distance_lb(code)
    out = {'alist': alist, 'fractional_distance': frac, 'lb': lb}
    print("Fractional distance: {}".format(frac))
    print("LB(C) = {}".format(lb))

    if exact:
        dmin = exhaustive_min_distance(code)
        out['d_min'] = dmin
        print("d_min = {}".format(dmin))

    print("Time (s):", round(time.time() - start_time, ndigits=1))
    return to_jsonable(out)


# =========================================================
# Decoding
# =========================================================

def cmd_decode(alist: str, channel: str, seed: int, delta: float=0.0, bp_max_iters: int=100,
               lp_mode: str='explicit', lp_gap_tol: float=1e-7, output: str=None, lambda_csv: str=None):
    '''
    Transmit the all-zero word once, decode with BP and LP and test the
    certificate. Returns the verdict dictionary, also written as JSON to
    ``output`` when given.
    '''
    code = tanner.from_alist(alist)
    ch = channel_from_spec(channel)

    word = np.zeros(code.n_vars, dtype=np.int8)
    outputs = ch.transmit(word, seed)
    llrs = ch.llr(outputs)

    bp = bp_decode(code, llrs, bp_max_iters)
    lp = lp_decode(code, llrs, mode=lp_mode, gap_tol=lp_gap_tol)
    verdict = amlc_check(bp, lp, llrs, delta, code)

    config = {'subcommand': 'decode', 'alist': alist, 'channel': ch.to_dict(), 'seed': int(seed),
              'delta': float(delta), 'bp_max_iters': int(bp_max_iters), 'lp_mode': lp_mode,
              'lp_gap_tol': float(lp_gap_tol)}

    report = verdict.to_dict()
    report.update({'bp_iterations': bp.iterations_used,
                   'bp_bit_errors': int(bp.hard_decision.sum()),
                   'lp_objective': lp.objective,
                   'lp_integral': lp.is_integral,
                   'ml_certificate': ml_certificate(lp, code),
                   'channel_flips': int(np.count_nonzero(llrs < 0)),
                   'config': config})
    report = to_jsonable(report)

    if output:
        _makeParent(output)
        write_json(output, report)
    if lambda_csv:
        _makeParent(lambda_csv)
        lp.to_csv(lambda_csv)
        write_config_echo(lambda_csv, config)
    return report


# =========================================================
# Bounds and certification runs
# =========================================================

def cmd_bound(n_vars: int, var_degree: int, check_degree: int, gamma: int, p_grid, deltas,
              output: str, workers: int=1, grid: GridConfig=GridConfig(), table_csv: str=None):
    '''
    (p, delta, ln_bound) triples over a BSC crossover grid.

    With ``table_csv`` the per-weight table of the last (p, delta) pair is
    written as well.
    '''
    spec = ensemble(n_vars, var_degree, check_degree)
    channels = sweep_channels(p_grid, deltas, gamma)

    start_time = time.time()
    print("\nSweeping bound for {} over p={} and delta={}...".format(spec, list(p_grid), list(deltas)))
    df = bound_sweep(spec, p_grid, deltas, gamma, grid=grid, workers=workers)

    _makeParent(output)
    df.to_csv(output, index=False, float_format=CSV_FLOAT_FORMAT)
    config = {'subcommand': 'bound', 'ensemble': spec.to_dict(), 'gamma': int(gamma),
              'p_grid': [float(p) for p in p_grid], 'deltas': [float(d) for d in deltas],
              'grid': grid.to_dict()}
    write_config_echo(output, config)
    print(output)

    if table_csv:
        table = overall_bound(float(deltas[-1]), gamma, channels[-1], spec.avg_distance_spectrum(),
                              grid=grid, workers=workers)
        _makeParent(table_csv)
        table.to_csv(table_csv)
        write_config_echo(table_csv, dict(config, p=float(p_grid[-1]), delta=float(deltas[-1])))

    print("\nDone!")
    print("Time (s):", round(time.time() - start_time, ndigits=1))
    return df


def cmd_confidence(cfg, output: str, trial_log: str=None, table_csv: str=None, verbose: bool=True):
    '''
    Certification run. Writes the JSON report to ``output`` and, when given,
    the per-trial CSV and the bound table.
    '''
    report = run_algorithm1(cfg, verbose=verbose)

    _makeParent(output)
    report.to_json(output)
    print(output)

    if trial_log:
        _makeParent(trial_log)
        report.write_trial_log(trial_log)
        write_config_echo(trial_log, report.config)
        print(trial_log)
    if table_csv and report.ds2_table is not None:
        _makeParent(table_csv)
        report.ds2_table.to_csv(table_csv)
        write_config_echo(table_csv, report.config)
        print(table_csv)

    print("\nStatus: {}  E = {}  L = {}  log2(1 - xi) = {}".format(
        report.status, report.failures, report.trials, report.log2_confidence_deficit))
    return report


def cmd_fer(n_vars: int, var_degree: int, check_degree: int, channel: str, frames: int, seed: int,
            output: str, bp_max_iters: int=100, workers: int=1, frame_log: str=None):
    '''Plain BP frame error rate over the ensemble, JSON summary.'''
    spec = ensemble(n_vars, var_degree, check_degree)
    ch = channel_from_spec(channel)

    summary, df = run_fer_simulation(spec, ch, frames, seed, max_iterations=bp_max_iters, workers=workers)

    _makeParent(output)
    write_json(output, dict(summary, config={'subcommand': 'fer', 'frames': int(frames)}))
    print(output)
    if frame_log:
        _makeParent(frame_log)
        df.to_csv(frame_log, index=False)
        write_config_echo(frame_log, summary)
    return summary
