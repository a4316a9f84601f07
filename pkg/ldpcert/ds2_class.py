'''
Generalised second Duman-Salehi (DS2) bound on the frame error probability
of an expurgated LDPC ensemble, conditioned on the approximate ML
certificate.

All quantities are carried in natural-log domain. For every codeword weight
h the per-weight term

    ln P1(h) = delta*rho*lam + rho*ln A_h + rho*(n-h)*ln S1 + rho*h*ln S2

is minimised over lam >= 0, 0 < rho <= 1, with the tilting measure psi set
to its optimum for the given (beta = h/n, rho, lam).
'''

import math
import time
from dataclasses import dataclass, asdict

import numpy as np
import pandas as pd
from joblib import Parallel, delayed
from scipy.optimize import brentq
from scipy.special import logsumexp

from .cert_utils import LN2, CSV_FLOAT_FORMAT
from .channel_class import mbios


@dataclass(frozen=True)
class GridConfig:
    lambda_min: float = 1e-3
    lambda_max: float = 50.0
    n_lambda: int = 25
    n_rho: int = 20
    refine_rounds: int = 3
    shrink: float = 5.0
    damping: float = 0.5
    tol: float = 1e-10
    max_iter: int = 10000
    stall: int = 50

    def to_dict(self):
        return asdict(self)


@dataclass(frozen=True)
class Ds2Params:
    lambda_w: float
    rho: float
    kappa: float
    zeta: float
    beta: float
    skipped: int = 0

    def to_dict(self):
        return asdict(self)


@dataclass(frozen=True)
class TiltingMeasure:
    weights: np.ndarray

    def log_weights(self):
        return np.log(self.weights)


class ConvergenceError(RuntimeError):

    def __init__(self, message, residual):
        super().__init__(message)
        self.residual = residual


def _checkDomain(rho, lambda_w):
    if not (0.0 < rho <= 1.0):
        raise ValueError("domain-error: rho must lie in (0, 1], got {}".format(rho))
    if lambda_w < 0:
        raise ValueError("domain-error: lambda must be >= 0, got {}".format(lambda_w))


# =========================================================
# Per-weight term
# =========================================================

def _logP1(h, n, log_Ah, delta, rho, lam, log_psi, ch):
    '''Vectorised over rows of (rho, lam, log_psi).'''
    rho = np.asarray(rho, dtype=float)
    lam = np.asarray(lam, dtype=float)
    a = (1.0 - 1.0 / rho)[:, None]
    # a == 0 at rho = 1, so psi drops out exactly
    tilt = np.where(a == 0.0, 0.0, a * log_psi)
    ln_s1 = logsumexp(tilt + ch.log_q0[None, :] / rho[:, None], axis=1)
    ln_s2 = logsumexp(tilt + ((1.0 - lam * rho) / rho)[:, None] * ch.log_q0[None, :]
                        + lam[:, None] * ch.log_q1[None, :], axis=1)
    return delta * rho * lam + rho * log_Ah + rho * (n - h) * ln_s1 + rho * h * ln_s2


def p1_bound(h, params, psi, log_Ah, ch, delta, n):
    '''
    ln P1(h) for fixed parameters and tilting measure.

    Returns None when A_h is zero-marked (log_Ah is None).
    '''
    _checkDomain(params.rho, params.lambda_w)
    if not (1 <= h <= n):
        raise ValueError("domain-error: need 1 <= h <= n, got h={} n={}".format(h, n))
    if log_Ah is None:
        return None
    out = _logP1(h, n, log_Ah, delta, np.array([params.rho]), np.array([params.lambda_w]),
                 psi.log_weights()[None, :], ch)
    return float(out[0])


def union_bhattacharyya(h, log_Ah, ch):
    '''Union bound with the Bhattacharyya parameter: ln A_h + h ln B.'''
    if log_Ah is None:
        return None
    return log_Ah + h * math.log(ch.bhattacharyya())


# =========================================================
# Tilting measure
# =========================================================

def _logKappaMap(log_kappa, beta, rho, lam, ch):
    '''ln of the right side of the kappa fixed-point equation, vectorised.'''
    dl = ch.log_q1 - ch.log_q0
    lr = lam[:, None] * dl[None, :]
    lb = np.logaddexp(0.0, log_kappa[:, None] + lr)
    w = (rho[:, None] - 1.0) * lb + ch.log_q0[None, :]
    num = logsumexp(w, axis=1)
    den = logsumexp(w + lr, axis=1)
    return math.log(beta / (1.0 - beta)) + num - den


def _residual(kappa, f_kappa):
    return np.abs(f_kappa - kappa) / np.maximum(1.0, kappa)


def _bracketKappa(beta, rho, lam, ch, tol):
    '''Scalar fallback: root of f(kappa) - kappa by Brent's method.'''
    r = np.array([rho])
    l = np.array([lam])

    def g(k):
        return math.exp(_logKappaMap(np.array([math.log(k)]) if k > 0 else np.array([-np.inf]), beta, r, l, ch)[0]) - k

    hi = max(1.0, 2.0 * beta / (1.0 - beta))
    for _ in range(200):
        if g(hi) < 0:
            break
        hi *= 2.0
    else:
        raise ConvergenceError("no bracket for kappa at beta={} rho={} lambda={}".format(beta, rho, lam), math.inf)

    kappa = brentq(g, 0.0, hi, xtol=1e-300, rtol=4 * np.finfo(float).eps, maxiter=1000)
    return kappa


def _solveKappa(beta, rho, lam, ch, grid):
    '''
    Damped fixed-point iteration for kappa at every (rho, lam) pair.

    Returns (kappa, residual); entries that stall for ``grid.stall``
    iterations are handed to the bracketing solver, entries that still fail
    carry NaN.
    '''
    rho = np.asarray(rho, dtype=float)
    lam = np.asarray(lam, dtype=float)
    kappa = np.full(rho.shape, beta / (1.0 - beta))
    f_kappa = np.exp(_logKappaMap(np.log(kappa), beta, rho, lam, ch))
    res = _residual(kappa, f_kappa)
    best = res.copy()
    since = np.zeros(rho.shape, dtype=np.int64)
    active = res > grid.tol
    stalled = np.zeros(rho.shape, dtype=bool)

    it = 0
    while np.any(active) and it < grid.max_iter:
        it += 1
        idx = np.flatnonzero(active)
        kappa[idx] = (1.0 - grid.damping) * kappa[idx] + grid.damping * f_kappa[idx]
        with np.errstate(divide='ignore'):
            f_kappa[idx] = np.exp(_logKappaMap(np.log(kappa[idx]), beta, rho[idx], lam[idx], ch))
        res[idx] = _residual(kappa[idx], f_kappa[idx])

        improved = res[idx] < best[idx]
        best[idx] = np.where(improved, res[idx], best[idx])
        since[idx] = np.where(improved, 0, since[idx] + 1)

        done = res[idx] <= grid.tol
        stuck = since[idx] >= grid.stall
        stalled[idx[stuck & ~done]] = True
        active[idx[done | stuck]] = False

    stalled |= active

    for k in np.flatnonzero(stalled):
        try:
            kk = _bracketKappa(beta, rho[k], lam[k], ch, grid.tol)
        except (ConvergenceError, ValueError, OverflowError):
            kappa[k] = np.nan
            continue
        fk = math.exp(_logKappaMap(np.array([math.log(kk)]) if kk > 0 else np.array([-np.inf]),
                                   beta, rho[k:k + 1], lam[k:k + 1], ch)[0])
        kappa[k] = kk
        res[k] = abs(fk - kk) / max(1.0, kk)
        if res[k] > grid.tol:
            kappa[k] = np.nan

    return kappa, res


def _tiltFromKappa(kappa, rho, lam, ch):
    '''ln psi and ln zeta for finite kappa, vectorised.'''
    dl = ch.log_q1 - ch.log_q0
    with np.errstate(divide='ignore'):
        lk = np.log(kappa)
    lb = np.logaddexp(0.0, lk[:, None] + lam[:, None] * dl[None, :])
    unnorm = ch.log_q0[None, :] + rho[:, None] * lb
    log_zeta = -logsumexp(unnorm, axis=1)
    return unnorm + log_zeta[:, None], log_zeta


def _tiltFullWeight(rho, lam, ch):
    '''beta = 1: psi proportional to Q(y|0)^(1-lam*rho) Q(y|1)^(lam*rho).'''
    dl = ch.log_q1 - ch.log_q0
    unnorm = ch.log_q0[None, :] + (rho * lam)[:, None] * dl[None, :]
    log_zeta = -logsumexp(unnorm, axis=1)
    return unnorm + log_zeta[:, None], log_zeta


def solve_tilting(beta, rho, lambda_w, ch, grid=GridConfig()):
    '''
    Optimum tilting measure for fixed (beta, rho, lambda).

    psi(y) = zeta Q(y|0) [1 + kappa (Q(y|1)/Q(y|0))^lambda]^rho, with kappa
    the fixed point of its defining equation and zeta the normaliser.

    Raises ConvergenceError carrying the last residual when neither the
    damped iteration nor the bracketing fallback reaches ``grid.tol``.
    '''
    if not (0.0 < beta < 1.0):
        raise ValueError("domain-error: beta must lie in (0, 1), got {}".format(beta))
    _checkDomain(rho, lambda_w)

    r = np.array([float(rho)])
    l = np.array([float(lambda_w)])
    kappa, res = _solveKappa(beta, r, l, ch, grid)
    if not np.isfinite(kappa[0]):
        raise ConvergenceError("kappa iteration did not converge at beta={} rho={} lambda={}, residual {:.3e}".format(beta, rho, lambda_w, res[0]), float(res[0]))

    log_psi, log_zeta = _tiltFromKappa(kappa, r, l, ch)
    psi = TiltingMeasure(np.exp(log_psi[0]))
    params = Ds2Params(float(lambda_w), float(rho), float(kappa[0]), float(np.exp(log_zeta[0])), float(beta))
    return psi, params


def kappa_residual(kappa, beta, rho, lambda_w, ch):
    '''Relative residual |f(kappa) - kappa| / max(1, kappa) of the fixed-point equation.'''
    fk = math.exp(_logKappaMap(np.array([math.log(kappa)]), beta, np.array([rho]), np.array([lambda_w]), ch)[0])
    return abs(fk - kappa) / max(1.0, kappa)


# =========================================================
# Per-weight optimisation
# =========================================================

def _evaluate(h, n, log_Ah, delta, rho, lam, ch, grid):
    '''
    ln P1(h) at every (rho, lam) with the optimum tilting measure.
    Returns (values, kappa, log_zeta); failed points are +inf.
    '''
    rho = np.asarray(rho, dtype=float)
    lam = np.asarray(lam, dtype=float)
    beta = h / n

    if h == n:
        log_psi, log_zeta = _tiltFullWeight(rho, lam, ch)
        kappa = np.full(rho.shape, np.inf)
    else:
        kappa, _ = _solveKappa(beta, rho, lam, ch, grid)
        log_psi, log_zeta = _tiltFromKappa(np.nan_to_num(kappa, nan=1.0), rho, lam, ch)

    vals = _logP1(h, n, log_Ah, delta, rho, lam, log_psi, ch)
    # psi is irrelevant at rho = 1, so a failed fixed point only matters below it
    failed = (np.isnan(kappa) & (rho < 1.0)) | np.isnan(vals)
    vals = np.where(failed, np.inf, vals)
    return vals, kappa, log_zeta


def _seedGrid(grid):
    lams = np.geomspace(grid.lambda_min, grid.lambda_max, grid.n_lambda)
    rhos = np.arange(1, grid.n_rho + 1) / grid.n_rho
    rr, ll = np.meshgrid(rhos, lams, indexing='ij')
    # Bhattacharyya point first so it wins ties
    rho = np.concatenate([[1.0], rr.ravel()])
    lam = np.concatenate([[0.5], ll.ravel()])
    return rho, lam


def optimize_weight(h, log_Ah, ch, delta, n, grid=GridConfig()):
    '''
    Minimise ln P1(h) over (lambda, rho).

    A coarse grid (geometric in lambda, linear in rho, plus the
    Bhattacharyya point rho = 1, lambda = 1/2) is followed by coordinate
    descent that shrinks its steps ``grid.shrink``-fold after each of
    ``grid.refine_rounds`` rounds. Grid points whose fixed point fails are
    skipped and counted in ``Ds2Params.skipped``.

    Returns
    -------
    (float, Ds2Params), or (None, None) for a zero-marked A_h.
    '''
    if log_Ah is None:
        return None, None
    if not (1 <= h <= n):
        raise ValueError("domain-error: need 1 <= h <= n, got h={} n={}".format(h, n))

    rho, lam = _seedGrid(grid)
    vals, kappa, log_zeta = _evaluate(h, n, log_Ah, delta, rho, lam, ch, grid)
    skipped = int(np.sum(~np.isfinite(vals)))

    k = int(np.argmin(vals))
    best = (float(vals[k]), float(rho[k]), float(lam[k]), float(kappa[k]), float(log_zeta[k]))

    step_l = math.log(grid.lambda_max / grid.lambda_min) / max(grid.n_lambda - 1, 1)
    step_r = 1.0 / grid.n_rho

    for _ in range(grid.refine_rounds):
        for _move in range(100):
            _, r0, l0, _, _ = best
            cand_r = np.array([r0, r0, min(1.0, r0 + step_r), max(step_r / grid.shrink ** 2, r0 - step_r)])
            cand_l = np.array([l0 * math.exp(step_l), l0 * math.exp(-step_l), l0, l0])
            cv, ck, cz = _evaluate(h, n, log_Ah, delta, cand_r, cand_l, ch, grid)
            j = int(np.argmin(cv))
            if not cv[j] < best[0]:
                break
            best = (float(cv[j]), float(cand_r[j]), float(cand_l[j]), float(ck[j]), float(cz[j]))
        step_l /= grid.shrink
        step_r /= grid.shrink

    value, r, l, kp, lz = best
    params = Ds2Params(l, r, kp, float(math.exp(lz)), h / n, skipped)
    return value, params


# =========================================================
# Overall bound
# =========================================================

class BoundTable(object):

    '''
    Per-weight ln P1(h) for h = 1..N and the capped total
    ln min(1, 2 sum_h P1(h)).
    '''

    def __init__(self, n_vars, rows, total, delta, gamma, channel):
        self.n_vars = n_vars
        self.rows = rows
        self.total = total
        self.delta = delta
        self.gamma = gamma
        self.channel = channel

    def ln_p1(self, h):
        row = self.rows[h - 1]
        return row['ln_P1']

    def to_dataframe(self):
        df = pd.DataFrame(self.rows, columns=['h', 'ln_P1', 'lambda', 'rho', 'kappa', 'skipped', 'zero_flag'])
        summary = pd.DataFrame([{'h': 'total', 'ln_P1': self.total}])
        return pd.concat([df.astype({'h': object}), summary], ignore_index=True)

    def to_csv(self, path):
        self.to_dataframe().to_csv(path, index=False, float_format=CSV_FLOAT_FORMAT)
        return path

    def to_dict(self):
        return {'n_vars': self.n_vars, 'delta': self.delta, 'gamma': self.gamma,
                'channel': self.channel, 'ln_total': self.total}


def overall_bound(delta, gamma, ch, spectrum, grid=GridConfig(), workers=1, verbose=False):
    '''
    Bound on the conditional frame error probability.

    The spectrum is expurgated at depth gamma with doubling, every surviving
    weight is optimised independently and the terms are combined as
    ln min(1, 2 * sum_h P1(h)).

    Parameters
    ----------
    delta : float
        AMLC proximity gap.
    gamma : int
        Expurgation depth.
    ch : mbios
    spectrum : spectrum
        Unexpurgated ensemble-average spectrum.
    grid : GridConfig
    workers : int
        joblib n_jobs for the per-weight optimisations.

    Returns
    -------
    BoundTable
    '''
    if gamma < 0:
        raise ValueError("invalid-spec: gamma must be >= 0, got {}".format(gamma))
    if delta < 0:
        raise ValueError("domain-error: delta must be >= 0, got {}".format(delta))

    start_time = time.time()
    n = spectrum.n_vars
    table = spectrum.expurgate(gamma, doubling=True)
    hs = [h for h in range(1, n + 1) if not table.zero[h]]

    if verbose:
        print("\nOptimising DS2 terms for {} weights (delta={}, gamma={})...".format(len(hs), delta, gamma))

    results = Parallel(n_jobs=workers, verbose=10 if verbose else 0)(
        delayed(optimize_weight)(h, table.log_count(h), ch, delta, n, grid) for h in hs)
    by_h = dict(zip(hs, results))

    rows = []
    terms = []
    for h in range(1, n + 1):
        if h not in by_h:
            rows.append({'h': h, 'ln_P1': np.nan, 'lambda': np.nan, 'rho': np.nan,
                         'kappa': np.nan, 'skipped': 0, 'zero_flag': True})
            continue
        value, params = by_h[h]
        rows.append({'h': h, 'ln_P1': value, 'lambda': params.lambda_w, 'rho': params.rho,
                     'kappa': params.kappa, 'skipped': params.skipped, 'zero_flag': False})
        if np.isfinite(value):
            terms.append(value)

    if terms:
        total = min(0.0, LN2 + float(logsumexp(np.array(terms))))
    else:
        total = float('-inf')

    if verbose:
        print("ln bound: {:.6e}".format(total))
        print("Time (s):", round(time.time() - start_time, ndigits=1))

    return BoundTable(n, rows, total, delta, gamma, ch.to_dict())


def sweep_channels(p_grid, deltas, gamma):
    if len(p_grid) == 0 or len(deltas) == 0:
        raise ValueError("invalid-spec: p grid and delta list must not be empty")
    if gamma < 0:
        raise ValueError("invalid-spec: gamma must be >= 0, got {}".format(gamma))
    for delta in deltas:
        if not (math.isfinite(delta) and delta >= 0):
            raise ValueError("domain-error: delta must be >= 0, got {}".format(delta))
    return [mbios.bsc(p) for p in p_grid]


def bound_sweep(spec, p_grid, deltas, gamma, grid=GridConfig(), workers=1, verbose=False):
    '''
    (p, delta, ln_bound) over a BSC crossover grid for one ensemble.

    Every crossover, delta and gamma is checked before the spectrum is
    computed, so a bad grid entry fails before any bound is evaluated.
    '''
    channels = sweep_channels(p_grid, deltas, gamma)

    table = spec.avg_distance_spectrum()
    out = []
    for p, ch in zip(p_grid, channels):
        for delta in deltas:
            bound = overall_bound(delta, gamma, ch, table, grid=grid, workers=workers, verbose=verbose)
            out.append({'p': float(p), 'delta': float(delta), 'ln_bound': bound.total})
    return pd.DataFrame(out, columns=['p', 'delta', 'ln_bound'])
