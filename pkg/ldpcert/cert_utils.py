'''
Shared helpers for ldpcert: seed splitting, exact log binomials and
NaN-safe scalar coercion for JSON / CSV artefacts.
'''

import json
import math
import os

import numpy as np

LN2 = math.log(2.0)

# Full-precision scientific notation for ln-domain CSV values
CSV_FLOAT_FORMAT = '%.17e'

WORKERS_ENV = 'LDPCERT_WORKERS'


# =========================================================
# Seeds
# =========================================================

def trial_seeds(master_seed, index, count=3):
    '''
    Split a master seed into independent 64-bit seeds for one trial.

    The split only depends on (master_seed, index), so trials can run in any
    order on any number of workers.
    '''
    seq = np.random.SeedSequence([int(master_seed), int(index)])
    state = seq.generate_state(count, dtype=np.uint64)
    return [int(s) for s in state]


def default_workers():
    value = os.environ.get(WORKERS_ENV, '')
    try:
        workers = int(value)
    except ValueError:
        return 1
    if workers == 0:
        return 1
    return workers


# =========================================================
# Log domain
# =========================================================

def log_comb(n, k):
    '''ln C(n, k) from exact integers.'''
    return math.log(math.comb(int(n), int(k)))


# =========================================================
# Scalar coercion
# =========================================================

def _json_scalar(value):
    if isinstance(value, np.bool_):
        return bool(value)
    if isinstance(value, np.integer):
        return int(value)
    if isinstance(value, np.floating):
        value = float(value)
    if isinstance(value, float):
        if math.isnan(value):
            return None
        if math.isinf(value):
            return '-inf' if value < 0 else 'inf'
    return value


def to_jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): to_jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [to_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [to_jsonable(v) for v in obj.tolist()]
    return _json_scalar(obj)


def write_json(path, payload):
    with open(path, 'w') as f:
        json.dump(to_jsonable(payload), f, indent=2)
    return path


def write_config_echo(out_file, config):
    '''Side-car ``<out_file>.config.json`` with the effective configuration.'''
    return write_json('{}.config.json'.format(out_file), config)
