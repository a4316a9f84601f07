'''
LP decoding over the fundamental polytope, the ML certificate and the
fractional-distance lower bound on d_min.

Every LP goes through scipy's HiGHS interface. The returned optimum carries
a certified gap: a Lagrangian lower bound built from the solver duals, which
is a valid bound on the LP minimum for any dual vector, is subtracted from
the primal objective.
'''

import functools
import itertools
import math
from dataclasses import dataclass, field

import numpy as np
import pandas as pd
from scipy import sparse
from scipy.optimize import linprog

from .cert_utils import CSV_FLOAT_FORMAT

INTEGRALITY_TOL = 1e-6
BOX_TOL = 1e-6
CUT_TOL = 1e-6
DEGREE_CAP = 8
MAX_CUT_ROUNDS = 500
LB_ROUND_TOL = 1e-6
FEASIBILITY_SLACK = 1e-9
LARGE_DEGREE_WARNING = 12

# First attempt, then a tighter dual-simplex re-solve
_SOLVER_ATTEMPTS = (
    ('highs', {}),
    ('highs-ds', {'presolve': False,
                  'primal_feasibility_tolerance': 1e-10,
                  'dual_feasibility_tolerance': 1e-10}),
)


class SolverError(RuntimeError):
    pass


@dataclass(frozen=True)
class LpSolution:
    pseudocodeword: np.ndarray
    objective: float
    is_integral: bool
    certified_gap: float
    mode: str = 'explicit'
    cuts: int = 0
    omega: dict = field(default=None, repr=False, compare=False)

    def rounded(self):
        return np.rint(self.pseudocodeword).astype(np.int8)

    def to_dataframe(self):
        return pd.DataFrame({'index': np.arange(len(self.pseudocodeword)),
                             'lambda': self.pseudocodeword})

    def to_csv(self, path):
        self.to_dataframe().to_csv(path, index=False, float_format=CSV_FLOAT_FORMAT)
        return path


# =========================================================
# Objective
# =========================================================

def objective(word, llrs):
    word = np.asarray(word, dtype=float)
    llrs = np.asarray(llrs, dtype=float)
    if word.shape != llrs.shape:
        raise ValueError("length-mismatch: word of length {} against {} LLRs".format(word.size, llrs.size))
    return float(np.dot(word, llrs))


# =========================================================
# Solver wrapper
# =========================================================

def _lagrangianBound(res, cost, a_ub, b_ub, a_eq, b_eq, lower, upper):
    '''
    Lower bound on min cost.x from arbitrary duals: b_eq.y + b_ub.min(z,0)
    plus the box minimum of the reduced costs.
    '''
    reduced = np.array(cost, dtype=float)
    bound = 0.0
    if a_eq is not None:
        y = np.asarray(res.eqlin.marginals, dtype=float)
        reduced -= a_eq.T.dot(y)
        bound += float(np.dot(b_eq, y))
    if a_ub is not None:
        z = np.minimum(np.asarray(res.ineqlin.marginals, dtype=float), 0.0)
        reduced -= a_ub.T.dot(z)
        bound += float(np.dot(b_ub, z))
    bound += float(np.sum(np.minimum(reduced * lower, reduced * upper)))
    return bound


def _solveLp(cost, a_ub, b_ub, a_eq, b_eq, lower, upper, gap_tol, allow_infeasible=False):
    '''
    Returns (x, primal, bound) or None when infeasible and allowed.
    '''
    bounds = np.column_stack([lower, upper])
    last = 'no attempt'
    for method, options in _SOLVER_ATTEMPTS:
        res = linprog(cost, A_ub=a_ub, b_ub=b_ub, A_eq=a_eq, b_eq=b_eq,
                      bounds=bounds, method=method, options=options)
        if res.status == 2:
            if allow_infeasible:
                return None
            last = 'infeasible ({})'.format(res.message)
            continue
        if res.status != 0:
            last = res.message
            continue

        x = np.asarray(res.x, dtype=float)
        primal = float(np.dot(cost, x))
        bound = _lagrangianBound(res, cost, a_ub, b_ub, a_eq, b_eq, lower, upper)
        if primal - bound <= gap_tol * (1.0 + abs(primal)):
            return x, primal, bound
        last = 'duality gap {:.3e} above tolerance'.format(primal - bound)

    raise SolverError("LP solve failed: {}".format(last))


# =========================================================
# Polytope descriptions
# =========================================================

@functools.lru_cache(maxsize=None)
def _evenWords(degree):
    '''Even-weight local words of a single parity check, one per row.'''
    words = np.array(list(itertools.product((0, 1), repeat=degree)), dtype=np.int8).reshape(-1, degree)
    return words[words.sum(axis=1) % 2 == 0]


@functools.lru_cache(maxsize=None)
def _oddSubsets(degree):
    '''Sign rows for the parity inequalities of one check: +1 on S, -1 off S, |S| odd.'''
    words = np.array(list(itertools.product((0, 1), repeat=degree)), dtype=np.int8).reshape(-1, degree)
    odd = words[words.sum(axis=1) % 2 == 1]
    return odd


def _explicitSystem(h, degree_cap):
    '''
    Equality system in (lambda, w): per check, sum_g w = 1 and
    lambda_i = sum_{g: g_i = 1} w_g for every i in the check.
    '''
    n = h.n_vars
    rows, cols, vals, rhs = [], [], [], []
    blocks = []
    col = n
    row = 0
    for j, nbrs in enumerate(h.check_neighbors):
        deg = len(nbrs)
        if deg > degree_cap:
            raise ValueError("degree-cap-exceeded: check {} has degree {} > {}; use adaptive mode".format(j, deg, degree_cap))
        if deg == 0:
            continue
        words = _evenWords(deg)
        n_words = words.shape[0]
        w_cols = np.arange(col, col + n_words)
        blocks.append((j, w_cols))

        rows.append(np.full(n_words, row))
        cols.append(w_cols)
        vals.append(np.ones(n_words))
        rhs.append(1.0)
        row += 1

        for k, i in enumerate(nbrs):
            hits = w_cols[words[:, k] == 1]
            rows.append(np.full(len(hits) + 1, row))
            cols.append(np.concatenate([[i], hits]))
            vals.append(np.concatenate([[1.0], -np.ones(len(hits))]))
            rhs.append(0.0)
            row += 1
        col += n_words

    if row == 0:
        return None, None, n, blocks
    a_eq = sparse.csr_matrix((np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))), shape=(row, col))
    return a_eq, np.array(rhs), col, blocks


def _parityRows(h, checks=None):
    '''
    Full parity-inequality description restricted to ``checks``:
    sum_{S} lambda - sum_{N_j minus S} lambda <= |S| - 1.
    Returns (A, b, subset_sizes).
    '''
    checks = range(h.n_checks) if checks is None else checks
    rows, cols, vals, rhs, sizes = [], [], [], [], []
    row = 0
    for j in checks:
        nbrs = h.check_neighbors[j]
        if len(nbrs) == 0:
            continue
        for sub in _oddSubsets(len(nbrs)):
            rows.append(np.full(len(nbrs), row))
            cols.append(nbrs)
            vals.append(np.where(sub == 1, 1.0, -1.0))
            rhs.append(float(sub.sum() - 1))
            sizes.append(int(sub.sum()))
            row += 1
    if row == 0:
        return None, np.zeros(0), np.zeros(0, dtype=np.int64)
    a = sparse.csr_matrix((np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))), shape=(row, h.n_vars))
    return a, np.array(rhs), np.array(sizes, dtype=np.int64)


def _separateParity(h, lam):
    '''
    Most violated parity inequality of every check, kept when violated by
    more than CUT_TOL.
    '''
    cuts = []
    for nbrs in h.check_neighbors:
        if len(nbrs) == 0:
            continue
        vals = lam[nbrs]
        in_s = vals > 0.5
        if in_s.sum() % 2 == 0:
            k = int(np.argmin(np.abs(vals - 0.5)))
            in_s[k] = not in_s[k]
        lhs = vals[in_s].sum() - vals[~in_s].sum()
        if lhs - (in_s.sum() - 1) > CUT_TOL:
            cuts.append((nbrs, np.where(in_s, 1.0, -1.0), float(in_s.sum() - 1)))
    return cuts


# =========================================================
# LP decoding
# =========================================================

def _finish(h, llrs, x, bound, mode, cuts=0, omega=None):
    lam = x[:h.n_vars]
    if np.any(lam < -BOX_TOL) or np.any(lam > 1.0 + BOX_TOL):
        raise SolverError("LP solution leaves the unit box by {:.3e}".format(max(-lam.min(), lam.max() - 1.0)))
    lam = np.clip(lam, 0.0, 1.0)
    obj = objective(lam, llrs)
    integral = bool(np.all(np.minimum(lam, 1.0 - lam) <= INTEGRALITY_TOL))
    # Clamping moves the objective off the solver optimum; cover both sides
    gap = abs(obj - bound) + FEASIBILITY_SLACK * (1.0 + abs(obj))
    return LpSolution(lam, obj, integral, gap, mode=mode, cuts=cuts, omega=omega)


def _decodeExplicit(h, llrs, gap_tol, degree_cap, keep_omega):
    a_eq, b_eq, n_cols, blocks = _explicitSystem(h, degree_cap)
    cost = np.zeros(n_cols)
    cost[:h.n_vars] = llrs
    lower = np.zeros(n_cols)
    upper = np.ones(n_cols)

    x, primal, bound = _solveLp(cost, None, None, a_eq, b_eq, lower, upper, gap_tol)

    omega = None
    if keep_omega:
        omega = {j: np.clip(x[w_cols], 0.0, 1.0) for j, w_cols in blocks}
    return _finish(h, llrs, x, bound, 'explicit', omega=omega)


def _decodeAdaptive(h, llrs, gap_tol):
    n = h.n_vars
    lower = np.zeros(n)
    upper = np.ones(n)
    rows, cols, vals, rhs = [], [], [], []

    for rnd in range(MAX_CUT_ROUNDS):
        if rhs:
            a_ub = sparse.csr_matrix((np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))), shape=(len(rhs), n))
            b_ub = np.array(rhs)
        else:
            a_ub, b_ub = None, None

        x, primal, bound = _solveLp(llrs, a_ub, b_ub, None, None, lower, upper, gap_tol)

        new = _separateParity(h, x)
        if not new:
            return _finish(h, llrs, x, bound, 'adaptive', cuts=len(rhs))
        for nbrs, signs, b in new:
            rows.append(np.full(len(nbrs), len(rhs)))
            cols.append(nbrs)
            vals.append(signs)
            rhs.append(b)

    raise SolverError("adaptive LP did not close after {} cut rounds".format(MAX_CUT_ROUNDS))


def lp_decode(h, llrs, mode='explicit', gap_tol=1e-7, degree_cap=DEGREE_CAP, keep_omega=False):
    '''
    Minimise sum_i lambda_i gamma_i over the fundamental polytope of h.

    Parameters
    ----------
    h : tanner
    llrs : array
        Channel LLRs.
    mode : str
        'explicit' instantiates every even-weight local word of every check
        (checks of degree <= degree_cap only). 'adaptive' uses the parity
        inequalities of the same polytope with cut generation.
    gap_tol : float
        Required certified gap, relative to 1 + |objective|.
    keep_omega : bool
        Explicit mode only: return the local-word weights per check.

    Returns
    -------
    LpSolution
    '''
    llrs = np.asarray(llrs, dtype=float)
    if llrs.shape != (h.n_vars,):
        raise ValueError("length-mismatch: {} LLRs for a code of length {}".format(llrs.size, h.n_vars))
    if not np.all(np.isfinite(llrs)):
        raise ValueError("invalid-spec: LLRs must be finite")

    if mode == 'explicit':
        return _decodeExplicit(h, llrs, gap_tol, degree_cap, keep_omega)
    if mode == 'adaptive':
        return _decodeAdaptive(h, llrs, gap_tol)
    raise ValueError("invalid-spec: unknown LP mode {}".format(mode))


def ml_certificate(sol, h):
    return bool(sol.is_integral and h.is_codeword(sol.rounded()))


# =========================================================
# Fractional distance
# =========================================================

def _reached(best, stop_at):
    return stop_at is not None and best - LB_ROUND_TOL <= stop_at


def fractional_distance(h, gap_tol=1e-7, stop_at=None):
    '''
    Minimum of sum_i lambda_i over the nonzero vertices of the fundamental
    polytope.

    Every such vertex lies on a facet not containing 0: lambda_i = 1, or a
    parity inequality with |S| >= 3. The weight is minimised over each of
    these facets in turn. Returns the smallest Lagrangian lower bound found,
    or inf when no facet is feasible.

    With ``stop_at`` the search ends at the first facet whose bound is at or
    below it. The result then only shows that the full minimum is not above
    ``stop_at``.
    '''
    n = h.n_vars
    max_deg = int(h.check_degrees.max(initial=0))
    if max_deg > LARGE_DEGREE_WARNING:
        print("\nWARNING: fractional distance with check degree {} enumerates {} inequalities per check".format(max_deg, 2 ** (max_deg - 1)))

    a_ub, b_ub, sizes = _parityRows(h)
    cost = np.ones(n)
    best = math.inf

    for i in range(n):
        lower = np.zeros(n)
        upper = np.ones(n)
        lower[i] = 1.0
        out = _solveLp(cost, a_ub, b_ub, None, None, lower, upper, gap_tol, allow_infeasible=True)
        if out is not None:
            best = min(best, out[2])
        if _reached(best, stop_at):
            return best

    if a_ub is not None:
        lower = np.zeros(n)
        upper = np.ones(n)
        for k in np.flatnonzero(sizes >= 3):
            a_eq = a_ub[k]
            b_eq = b_ub[k:k + 1]
            out = _solveLp(cost, a_ub, b_ub, a_eq, b_eq, lower, upper, gap_tol, allow_infeasible=True)
            if out is not None:
                best = min(best, out[2])
            if _reached(best, stop_at):
                return best

    return best


def min_distance_lb(h, stop_at=None):
    '''
    Integer lower bound on d_min: ceil(fractional distance - 1e-6).

    A code whose only codeword is 0 has no feasible facet; N + 1 is returned.
    ``stop_at`` is the rejection threshold: a result above it is the full
    bound, a result at or below it only decides the rejection.
    '''
    if stop_at is not None and stop_at < 1:
        return 1
    frac = fractional_distance(h, stop_at=stop_at)
    if math.isinf(frac):
        return h.n_vars + 1
    return max(1, int(math.ceil(frac - LB_ROUND_TOL)))
