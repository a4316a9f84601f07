'''
Binomial-tail confidence levels and the Monte Carlo certification harness.

A run samples L codes from the ensemble, rejects those whose minimum
distance cannot be shown to exceed gamma, decodes one all-zero transmission
per accepted code with BP and LP, and counts every trial where the
approximate ML certificate fails. With E failures the bound from the DS2
module holds for the expurgated ensemble with confidence xi(L, E/L).
'''

import math
import time
from dataclasses import dataclass, asdict, field, fields

import numpy as np
import pandas as pd
from joblib import Parallel, delayed
from scipy.special import gammaln

from .amlc import amlc_check
from .bp_class import bp_decode
from .cert_utils import LN2, CSV_FLOAT_FORMAT, trial_seeds, to_jsonable, write_json
from .channel_class import channel_from_spec
from .code_class import ensemble
from .ds2_class import GridConfig, overall_bound
from .lp_class import SolverError, lp_decode, min_distance_lb

EPS_MATCH_TOL = 1e-9


# =========================================================
# Confidence level
# =========================================================

def _failureCount(trials, epsilon=None, failures=None):
    trials = int(trials)
    if trials < 1:
        raise ValueError("invalid-spec: need at least one trial, got {}".format(trials))
    if failures is None:
        if epsilon is None:
            raise ValueError("invalid-spec: give epsilon or failures")
        failures = int(round(epsilon * trials))
        if abs(epsilon * trials - failures) > EPS_MATCH_TOL:
            raise ValueError("invalid-spec: epsilon*L = {} is not an integer".format(epsilon * trials))
    failures = int(failures)
    if failures < 0 or failures > trials:
        raise ValueError("invalid-spec: failures must lie in 0..{}, got {}".format(trials, failures))
    if 2 * failures >= trials:
        raise ValueError("epsilon-too-large: epsilon = {}/{} >= 0.5".format(failures, trials))
    return trials, failures


def xi(trials, epsilon=None, failures=None):
    '''
    log2(1 - xi) = log2(2^-L C(L, E) (E + 1)), with E = epsilon * L.

    The confidence level itself is 1 - 2^(returned value).
    '''
    L, E = _failureCount(trials, epsilon, failures)
    log_comb = gammaln(L + 1) - gammaln(E + 1) - gammaln(L - E + 1)
    return float(-L + log_comb / LN2 + math.log2(E + 1))


def binomial_tail_bound(trials, epsilon=None, failures=None):
    '''
    Returns (bound, exact), both log2: the bound 2^-L C(L, E)(E + 1) and
    the exact tail sum_{k <= E} C(L, k) 2^-L from exact integers.
    '''
    L, E = _failureCount(trials, epsilon, failures)
    exact = sum(math.comb(L, k) for k in range(E + 1))
    return xi(L, failures=E), math.log2(exact) - L


# =========================================================
# Configuration and records
# =========================================================

@dataclass(frozen=True)
class ExperimentConfig:
    n_vars: int = 100
    var_degree: int = 3
    check_degree: int = 4
    channel: str = 'bsc:0.08'
    delta: float = 0.0
    gamma: int = 2
    trials: int = 200
    master_seed: int = 0
    bp_max_iters: int = 100
    lp_mode: str = 'explicit'
    lp_gap_tol: float = 1e-7
    workers: int = 1
    with_bound: bool = True
    grid: GridConfig = field(default_factory=GridConfig)

    def __post_init__(self):
        if self.trials < 1:
            raise ValueError("invalid-spec: trials must be >= 1, got {}".format(self.trials))
        if self.delta < 0:
            raise ValueError("domain-error: delta must be >= 0, got {}".format(self.delta))
        if self.gamma < 0 or self.gamma > self.n_vars:
            raise ValueError("invalid-spec: gamma must lie in 0..{}, got {}".format(self.n_vars, self.gamma))
        if self.bp_max_iters < 1:
            raise ValueError("invalid-spec: bp_max_iters must be >= 1, got {}".format(self.bp_max_iters))
        if self.lp_mode not in ('explicit', 'adaptive'):
            raise ValueError("invalid-spec: unknown LP mode {}".format(self.lp_mode))
        # Fail early on a bad ensemble or channel
        self.code_ensemble()
        self.channel_model()

    def code_ensemble(self):
        return ensemble(self.n_vars, self.var_degree, self.check_degree)

    def channel_model(self):
        return channel_from_spec(self.channel)

    def to_dict(self):
        return asdict(self)

    @classmethod
    def from_dict(cls, values):
        values = dict(values)
        names = {f.name for f in fields(cls)}
        unknown = set(values) - names
        if unknown:
            raise ValueError("invalid-spec: unknown config keys {}".format(sorted(unknown)))
        if isinstance(values.get('grid'), dict):
            values['grid'] = GridConfig(**values['grid'])
        return cls(**values)


@dataclass(frozen=True)
class TrialRecord:
    trial: int
    seed: int
    code_seed: int
    noise_seed: int
    lb_value: int
    lb_passed: bool
    bp_codeword: bool
    bp_iterations: int
    lp_objective: float
    lp_integral: bool
    lp_gap: float
    amlc_gap: float
    amlc_holds: bool
    solver_error: bool
    failed: bool


_TRIAL_COLUMNS = [f.name for f in fields(TrialRecord)]


@dataclass(frozen=True)
class ConfidenceReport:
    trials: int
    failures: int
    epsilon: float
    log2_confidence_deficit: float
    status: str
    lb_rejections: int
    amlc_failures: int
    solver_failures: int
    ln_bound: float
    ds2_table: object = field(repr=False, compare=False)
    config: dict = field(repr=False)
    records: tuple = field(repr=False)

    def trial_log(self):
        return pd.DataFrame([asdict(r) for r in self.records], columns=_TRIAL_COLUMNS)

    def write_trial_log(self, path):
        self.trial_log().to_csv(path, index=False, float_format=CSV_FLOAT_FORMAT)
        return path

    def to_dict(self):
        return {'status': self.status,
                'trials': self.trials,
                'failures': self.failures,
                'epsilon': self.epsilon,
                'log2_confidence_deficit': self.log2_confidence_deficit,
                'lb_rejections': self.lb_rejections,
                'amlc_failures': self.amlc_failures,
                'solver_failures': self.solver_failures,
                'ln_bound': self.ln_bound,
                'config': self.config}

    def to_json(self, path):
        return write_json(path, self.to_dict())


# =========================================================
# Trials
# =========================================================

def _runTrial(index, cfg, spec, ch):
    '''One pass of the certification loop; pure given (cfg.master_seed, index).'''
    seed, code_seed, noise_seed = trial_seeds(cfg.master_seed, index, 3)
    code = spec.sample_regular_code(code_seed)

    rec = dict(trial=index, seed=seed, code_seed=code_seed, noise_seed=noise_seed,
               lb_value=-1, lb_passed=False, bp_codeword=False, bp_iterations=0,
               lp_objective=np.nan, lp_integral=False, lp_gap=np.nan,
               amlc_gap=np.nan, amlc_holds=False, solver_error=False, failed=True)

    try:
        lb = min_distance_lb(code, stop_at=cfg.gamma)
    except SolverError:
        rec['solver_error'] = True
        return TrialRecord(**rec)
    rec['lb_value'] = int(lb)
    rec['lb_passed'] = bool(lb > cfg.gamma)
    if not rec['lb_passed']:
        return TrialRecord(**rec)

    # All-zero transmission is sufficient by channel and decoder symmetry
    word = np.zeros(code.n_vars, dtype=np.int8)
    llrs = ch.llr(ch.transmit(word, noise_seed))

    bp = bp_decode(code, llrs, cfg.bp_max_iters)
    rec['bp_codeword'] = bool(bp.is_codeword)
    rec['bp_iterations'] = int(bp.iterations_used)

    try:
        lp = lp_decode(code, llrs, mode=cfg.lp_mode, gap_tol=cfg.lp_gap_tol)
    except SolverError:
        rec['solver_error'] = True
        return TrialRecord(**rec)
    rec['lp_objective'] = lp.objective
    rec['lp_integral'] = bool(lp.is_integral)
    rec['lp_gap'] = lp.certified_gap

    verdict = amlc_check(bp, lp, llrs, cfg.delta, code)
    rec['amlc_gap'] = np.nan if verdict.gap is None else verdict.gap
    rec['amlc_holds'] = bool(verdict.holds)
    rec['failed'] = not verdict.holds
    return TrialRecord(**rec)


def recheck_failures(trials_df, delta, gamma):
    '''
    Recompute every ``failed`` flag from the stored per-trial artefacts.
    '''
    df = trials_df
    gap = df['amlc_gap'].astype(float)
    amlc_ok = df['bp_codeword'].astype(bool) & gap.notna() & (gap <= delta + df['lp_gap'].astype(float))
    lb_ok = df['lb_value'].astype(int) > gamma
    return ~(lb_ok & ~df['solver_error'].astype(bool) & amlc_ok)


def run_algorithm1(cfg, verbose=True):
    '''
    Certification run for one (ensemble, channel, delta, gamma).

    Parameters
    ----------
    cfg : ExperimentConfig

    Returns
    -------
    ConfidenceReport
        ``status`` is 'error' with no deficit when E/L >= 0.5.
    '''
    start_time = time.time()
    spec = cfg.code_ensemble()
    ch = cfg.channel_model()

    if verbose:
        print("\nRunning {} trials on {} over {} (delta={}, gamma={})...".format(cfg.trials, spec, ch, cfg.delta, cfg.gamma))

    records = Parallel(n_jobs=cfg.workers, verbose=10 if verbose else 0)(
        delayed(_runTrial)(i, cfg, spec, ch) for i in range(cfg.trials))
    records = tuple(sorted(records, key=lambda r: r.trial))

    failures = sum(r.failed for r in records)
    # lb_value stays -1 when the distance LP itself failed
    lb_rejections = sum((not r.lb_passed) and r.lb_value >= 0 for r in records)
    solver_failures = sum(r.solver_error for r in records)
    amlc_failures = sum(r.lb_passed and not r.solver_error and not r.amlc_holds for r in records)

    if 2 * failures < cfg.trials:
        status = 'ok'
        deficit = xi(cfg.trials, failures=failures)
    else:
        status = 'error'
        deficit = None
        print("\nWARNING: {} of {} trials failed, no confidence level can be given".format(failures, cfg.trials))

    if verbose:
        print("Trials done. E = {}, L = {}".format(failures, cfg.trials))
        print("Time (s):", round(time.time() - start_time, ndigits=1))

    table = None
    ln_bound = None
    if cfg.with_bound:
        table = overall_bound(cfg.delta, cfg.gamma, ch, spec.avg_distance_spectrum(),
                              grid=cfg.grid, workers=cfg.workers, verbose=verbose)
        ln_bound = table.total

    return ConfidenceReport(trials=cfg.trials,
                            failures=failures,
                            epsilon=failures / cfg.trials,
                            log2_confidence_deficit=deficit,
                            status=status,
                            lb_rejections=lb_rejections,
                            amlc_failures=amlc_failures,
                            solver_failures=solver_failures,
                            ln_bound=ln_bound,
                            ds2_table=table,
                            config=to_jsonable(cfg.to_dict()),
                            records=records)


# =========================================================
# Plain frame error rate
# =========================================================

def _runFrame(index, master_seed, spec, ch, max_iterations):
    seed, code_seed, noise_seed = trial_seeds(master_seed, index, 3)
    code = spec.sample_regular_code(code_seed)
    word = np.zeros(spec.n_vars, dtype=np.int8)
    llrs = ch.llr(ch.transmit(word, noise_seed))
    bp = bp_decode(code, llrs, max_iterations)
    return {'frame': index, 'seed': seed,
            'bit_errors': int(bp.hard_decision.sum()),
            'bp_codeword': bool(bp.is_codeword),
            'iterations': int(bp.iterations_used),
            'frame_error': bool(bp.hard_decision.any())}


def run_fer_simulation(spec, ch, frames, master_seed, max_iterations=100, workers=1, verbose=True):
    '''
    Monte Carlo BP frame error rate over the ensemble: one fresh code and
    one all-zero transmission per frame.

    Returns (summary dict, per-frame DataFrame).
    '''
    start_time = time.time()
    if frames < 1:
        raise ValueError("invalid-spec: frames must be >= 1, got {}".format(frames))

    rows = Parallel(n_jobs=workers, verbose=10 if verbose else 0)(
        delayed(_runFrame)(i, master_seed, spec, ch, max_iterations) for i in range(frames))
    df = pd.DataFrame(rows).sort_values('frame').reset_index(drop=True)

    errors = int(df['frame_error'].sum())
    summary = {'frames': int(frames), 'frame_errors': errors, 'fer': errors / frames,
               'undetected_errors': int((df['frame_error'] & df['bp_codeword']).sum()),
               'ensemble': spec.to_dict(), 'channel': ch.to_dict(),
               'master_seed': int(master_seed), 'bp_max_iters': int(max_iterations)}

    if verbose:
        print("\nFER = {} / {} = {:.4e}".format(errors, frames, errors / frames))
        print("Time (s):", round(time.time() - start_time, ndigits=1))

    return summary, df
