'''
Binary LDPC codes: Tanner graphs, the (c,d)-regular configuration-model
ensemble and its average distance spectrum.
'''

import itertools
import math
import os

import numpy as np
import pandas as pd
from scipy import sparse
from scipy.special import logsumexp

from .cert_utils import LN2, CSV_FLOAT_FORMAT, log_comb

MAX_ENUM_VARS = 24
MAX_ENUM_DIM = 20
EXACT_SPECTRUM_MAX_N = 2000


def _readOnly(arr):
    arr = np.ascontiguousarray(arr)
    arr.setflags(write=False)
    return arr


class tanner(object):

    '''
    Parity-check matrix stored as a Tanner graph.

    check_neighbors[j] holds the sorted variable indices of check j,
    var_neighbors[i] the sorted check indices of variable i. Instances are
    immutable and may be shared between workers.
    '''

    #=======================================================================
    def __init__(self, n_vars, n_checks, check_neighbors):
        n_vars = int(n_vars)
        n_checks = int(n_checks)
        if n_vars < 1 or n_checks < 0:
            raise ValueError("invalid-spec: need n_vars >= 1 and n_checks >= 0, got {} x {}".format(n_checks, n_vars))
        if len(check_neighbors) != n_checks:
            raise ValueError("invalid-spec: {} neighbour lists for {} checks".format(len(check_neighbors), n_checks))

        checks = []
        for j, nbrs in enumerate(check_neighbors):
            nbrs = np.asarray(sorted(int(i) for i in nbrs), dtype=np.int64)
            if len(nbrs) and (nbrs[0] < 0 or nbrs[-1] >= n_vars):
                raise ValueError("invalid-spec: check {} references a variable outside 0..{}".format(j, n_vars - 1))
            if np.any(np.diff(nbrs) == 0):
                raise ValueError("invalid-spec: check {} repeats a variable".format(j))
            checks.append(_readOnly(nbrs))

        self.n_vars = n_vars
        self.n_checks = n_checks
        self.check_neighbors = tuple(checks)
        self.resamples = 0

        self._buildEdges()

    #=======================================================================
    def _buildEdges(self):
        '''
        Edge arrays ordered by check, plus padded slot tables used by the
        message-passing decoder. Padding entries point at index n_edges.
        '''
        edge_check = np.concatenate([np.full(len(n), j, dtype=np.int64) for j, n in enumerate(self.check_neighbors)] or [np.zeros(0, dtype=np.int64)])
        edge_var = np.concatenate(list(self.check_neighbors) or [np.zeros(0, dtype=np.int64)])
        n_edges = len(edge_var)

        check_deg = np.array([len(n) for n in self.check_neighbors], dtype=np.int64)
        var_deg = np.bincount(edge_var, minlength=self.n_vars).astype(np.int64)

        # Check slots: edges are already grouped by check
        check_slots = np.full((self.n_checks, max(int(check_deg.max(initial=0)), 1)), n_edges, dtype=np.int64)
        start = 0
        for j, deg in enumerate(check_deg):
            check_slots[j, :deg] = np.arange(start, start + deg)
            start += deg

        # Variable slots: stable sort keeps checks ascending per variable
        order = np.argsort(edge_var, kind='stable')
        var_slots = np.full((self.n_vars, max(int(var_deg.max(initial=0)), 1)), n_edges, dtype=np.int64)
        var_nbrs = []
        start = 0
        for i, deg in enumerate(var_deg):
            edges = order[start:start + deg]
            var_slots[i, :deg] = edges
            var_nbrs.append(_readOnly(edge_check[edges]))
            start += deg

        self.var_neighbors = tuple(var_nbrs)
        self.n_edges = n_edges
        self.edge_check = _readOnly(edge_check)
        self.edge_var = _readOnly(edge_var)
        self.check_degrees = _readOnly(check_deg)
        self.var_degrees = _readOnly(var_deg)
        self.check_slots = _readOnly(check_slots)
        self.var_slots = _readOnly(var_slots)

        self.H = sparse.csr_matrix(
            (np.ones(n_edges, dtype=np.int8), (edge_check, edge_var)),
            shape=(self.n_checks, self.n_vars))

    #=======================================================================
    @classmethod
    def from_dense(cls, H):
        H = np.asarray(H)
        if H.ndim != 2:
            raise ValueError("invalid-spec: dense H must be 2-D, got shape {}".format(H.shape))
        H = np.mod(H.astype(np.int64), 2)
        nbrs = [np.flatnonzero(row) for row in H]
        return cls(H.shape[1], H.shape[0], nbrs)

    def to_dense(self):
        return self.H.toarray().astype(np.int8)

    #=======================================================================
    @classmethod
    def from_alist(cls, path):
        '''
        Read a parity-check matrix in alist format.

        Layout: "N M", max degrees, variable degrees, check degrees, then
        N variable adjacency rows and M check adjacency rows (1-indexed,
        zero padding ignored).
        '''
        assert os.path.isfile(path), "{} does not exist.".format(path)

        with open(path, 'r') as f:
            tokens = [int(t) for t in f.read().split()]

        if len(tokens) < 4:
            raise ValueError("invalid-spec: truncated alist file {}".format(path))

        pos = 0

        def take(count):
            nonlocal pos
            if pos + count > len(tokens):
                raise ValueError("invalid-spec: truncated alist file {}".format(path))
            out = tokens[pos:pos + count]
            pos += count
            return out

        n_vars, n_checks = take(2)
        max_var_deg, max_check_deg = take(2)
        var_deg = take(n_vars)
        check_deg = take(n_checks)

        var_rows = []
        for i in range(n_vars):
            row = [v for v in take(max_var_deg) if v != 0]
            if len(row) != var_deg[i]:
                raise ValueError("invalid-spec: variable {} lists {} checks, degree says {}".format(i, len(row), var_deg[i]))
            var_rows.append(row)

        check_rows = []
        for j in range(n_checks):
            row = [v for v in take(max_check_deg) if v != 0]
            if len(row) != check_deg[j]:
                raise ValueError("invalid-spec: check {} lists {} variables, degree says {}".format(j, len(row), check_deg[j]))
            check_rows.append([v - 1 for v in row])

        code = cls(n_vars, n_checks, check_rows)

        # Both halves of the file must describe the same graph
        for i, row in enumerate(var_rows):
            if sorted(v - 1 for v in row) != code.var_neighbors[i].tolist():
                raise ValueError("invalid-spec: alist variable and check lists disagree at variable {}".format(i))

        return code

    def write_alist(self, path):
        max_var = int(self.var_degrees.max(initial=0))
        max_check = int(self.check_degrees.max(initial=0))

        def pad(row, width):
            vals = [str(int(v) + 1) for v in row] + ['0'] * (width - len(row))
            return ' '.join(vals)

        lines = ['{} {}'.format(self.n_vars, self.n_checks),
                 '{} {}'.format(max_var, max_check),
                 ' '.join(str(int(d)) for d in self.var_degrees),
                 ' '.join(str(int(d)) for d in self.check_degrees)]
        lines += [pad(n, max_var) for n in self.var_neighbors]
        lines += [pad(n, max_check) for n in self.check_neighbors]

        with open(path, 'w') as f:
            f.write('\n'.join(lines) + '\n')
        return path

    #=======================================================================
    def syndrome(self, word):
        word = np.asarray(word)
        if word.shape != (self.n_vars,):
            raise ValueError("length-mismatch: word has length {}, code has {} variables".format(word.size, self.n_vars))
        return np.asarray(self.H.dot(word.astype(np.int64)) % 2, dtype=np.int8)

    def is_codeword(self, word):
        return not np.any(self.syndrome(word))

    def is_regular(self, var_degree, check_degree):
        return bool(np.all(self.var_degrees == var_degree) and np.all(self.check_degrees == check_degree))

    def __eq__(self, other):
        if not isinstance(other, tanner):
            return NotImplemented
        return (self.n_vars == other.n_vars and self.n_checks == other.n_checks
                and all(np.array_equal(a, b) for a, b in zip(self.check_neighbors, other.check_neighbors)))

    def __hash__(self):
        return hash((self.n_vars, self.n_checks, tuple(tuple(n.tolist()) for n in self.check_neighbors)))

    def __repr__(self):
        return 'tanner(n_vars={}, n_checks={}, n_edges={})'.format(self.n_vars, self.n_checks, self.n_edges)


def is_codeword(h, word):
    return h.is_codeword(word)


# =========================================================
# GF(2) helpers for small codes
# =========================================================

def nullspace_basis(h):
    '''
    Basis of the code (GF(2) null space of H), one codeword per row.
    '''
    H = h.to_dense().astype(np.uint8)
    n = h.n_vars
    rows, pivots = 0, []
    for col in range(n):
        hit = np.flatnonzero(H[rows:, col]) + rows if rows < H.shape[0] else []
        if len(hit) == 0:
            continue
        r = hit[0]
        if r != rows:
            H[[rows, r]] = H[[r, rows]]
        others = np.flatnonzero(H[:, col])
        others = others[others != rows]
        H[others] ^= H[rows]
        pivots.append(col)
        rows += 1
        if rows == H.shape[0]:
            break

    free = [c for c in range(n) if c not in set(pivots)]
    basis = np.zeros((len(free), n), dtype=np.int8)
    for k, f in enumerate(free):
        basis[k, f] = 1
        for r, p in enumerate(pivots):
            basis[k, p] = H[r, f]
    return basis


def codewords(h):
    '''All codewords of a small code, zero word first.'''
    if h.n_vars > MAX_ENUM_VARS:
        raise ValueError("invalid-spec: exhaustive enumeration limited to N <= {}, got {}".format(MAX_ENUM_VARS, h.n_vars))
    basis = nullspace_basis(h)
    k = basis.shape[0]
    if k > MAX_ENUM_DIM:
        raise ValueError("invalid-spec: code dimension {} too large to enumerate".format(k))
    if k == 0:
        return np.zeros((1, h.n_vars), dtype=np.int8)
    coeffs = np.array(list(itertools.product((0, 1), repeat=k)), dtype=np.int64)
    return np.asarray(coeffs.dot(basis.astype(np.int64)) % 2, dtype=np.int8)


def exhaustive_min_distance(h):
    '''Minimum nonzero codeword weight; None for a code with only the zero word.'''
    words = codewords(h)
    weights = words.sum(axis=1)
    weights = weights[weights > 0]
    if len(weights) == 0:
        return None
    return int(weights.min())


def random_codeword(h, rng):
    basis = nullspace_basis(h)
    if basis.shape[0] == 0:
        return np.zeros(h.n_vars, dtype=np.int8)
    coeffs = rng.integers(0, 2, size=basis.shape[0])
    return np.asarray(coeffs.dot(basis.astype(np.int64)) % 2, dtype=np.int8)


# =========================================================
# Ensemble
# =========================================================

class ensemble(object):

    '''
    (c,d)-regular LDPC ensemble under the configuration model.

    Parameters
    ----------
    n_vars : int
        Block length N.
    var_degree : int
        Variable degree c.
    check_degree : int
        Check degree d.

    Sampling requires c >= 2, d >= 3; spectrum evaluation also accepts the
    degenerate c = 1 / d = 2 cases.
    '''

    #=======================================================================
    def __init__(self, n_vars, var_degree, check_degree):
        n_vars, var_degree, check_degree = int(n_vars), int(var_degree), int(check_degree)

        if n_vars < 1 or var_degree < 1 or check_degree < 2:
            raise ValueError("invalid-spec: need N >= 1, c >= 1, d >= 2, got N={} c={} d={}".format(n_vars, var_degree, check_degree))
        if (n_vars * var_degree) % check_degree != 0:
            raise ValueError("invalid-spec: N*c = {} is not divisible by d = {}".format(n_vars * var_degree, check_degree))

        self.n_vars = n_vars
        self.var_degree = var_degree
        self.check_degree = check_degree
        self.n_checks = n_vars * var_degree // check_degree

    def to_dict(self):
        return {'n_vars': self.n_vars, 'var_degree': self.var_degree, 'check_degree': self.check_degree}

    def __repr__(self):
        return 'ensemble(n_vars={}, var_degree={}, check_degree={})'.format(self.n_vars, self.var_degree, self.check_degree)

    #=======================================================================
    def _socketPairs(self, rng):
        '''
        One configuration-model draw. Returns (variable, check) keys of the
        mod-2 collapsed graph and whether any pair was repeated.
        '''
        n_sockets = self.n_vars * self.var_degree
        var_of_socket = np.repeat(np.arange(self.n_vars, dtype=np.int64), self.var_degree)
        check_of_socket = rng.permutation(n_sockets) // self.check_degree

        keys = var_of_socket * self.n_checks + check_of_socket
        uniq, counts = np.unique(keys, return_counts=True)
        return uniq[counts % 2 == 1], bool(np.any(counts > 1))

    def sample_regular_code(self, seed, resample=True, max_draws=100000):
        '''
        Sample a code from the socket-permutation construction.

        Parallel edges are collapsed mod 2. With resample=True any draw with
        a repeated pair is rejected so the result is exactly (c,d)-regular;
        the rejection count is stored on the returned code as ``resamples``.
        With resample=False the collapsed graph is returned as is, which is
        the object the average spectrum refers to.
        '''
        if self.var_degree < 2 or self.check_degree < 3:
            raise ValueError("invalid-spec: sampling needs c >= 2 and d >= 3, got c={} d={}".format(self.var_degree, self.check_degree))

        rng = np.random.default_rng(seed)

        rejected = 0
        while True:
            keys, repeated = self._socketPairs(rng)
            if not repeated or not resample:
                break
            rejected += 1
            if rejected >= max_draws:
                raise RuntimeError("Regular code sampling rejected {} draws in a row for {}".format(rejected, self))

        var_idx = keys // self.n_checks
        check_idx = keys % self.n_checks
        order = np.lexsort((var_idx, check_idx))
        var_idx, check_idx = var_idx[order], check_idx[order]
        bounds = np.cumsum(np.bincount(check_idx, minlength=self.n_checks))[:-1]
        nbrs = np.split(var_idx, bounds)

        code = tanner(self.n_vars, self.n_checks, nbrs)
        code.resamples = rejected
        return code

    #=======================================================================
    def _evenCheckPower(self, t_max):
        '''
        Exact coefficients a_t of y^t in g(y)^M, with
        g(y) = sum_k C(d, 2k) y^k the even-weight enumerator of one check
        written in y = x^2.
        '''
        d, m = self.check_degree, self.n_checks
        g = [math.comb(d, 2 * k) for k in range(d // 2 + 1)]
        deg = len(g) - 1

        a = [0] * (t_max + 1)
        a[0] = 1
        for n in range(1, t_max + 1):
            acc = 0
            for k in range(1, min(n, deg) + 1):
                acc += ((m + 1) * k - n) * g[k] * a[n - k]
            q, r = divmod(acc, n)
            assert r == 0, "non-integral power-series coefficient at t={}".format(n)
            a[n] = q
        return a

    def avg_distance_spectrum(self):
        '''
        Ensemble-average distance spectrum in log domain.

        Returns
        -------
        spectrum
            ln Abar_h = ln C(N,h) + ln coeff_{x^{ch}} g(x)^M - ln C(Nc, ch).
        '''
        n, c, d, m = self.n_vars, self.var_degree, self.check_degree, self.n_checks
        if n > EXACT_SPECTRUM_MAX_N:
            print("\nWARNING: exact spectrum for N={} may be slow".format(n))

        t_max = min(c * n // 2, m * (d // 2))
        coeffs = self._evenCheckPower(t_max)

        log_counts = np.zeros(n + 1, dtype=float)
        zero = np.zeros(n + 1, dtype=bool)
        for h in range(n + 1):
            ch = c * h
            if ch % 2 == 1 or ch // 2 > t_max or coeffs[ch // 2] == 0:
                zero[h] = True
                continue
            log_counts[h] = log_comb(n, h) + math.log(coeffs[ch // 2]) - log_comb(n * c, ch)

        log_counts[zero] = 0.0
        log_counts[0] = 0.0
        return spectrum(n, log_counts, zero)


def sample_regular_code(spec, rng_seed, resample=True):
    return spec.sample_regular_code(rng_seed, resample=resample)


def avg_distance_spectrum(spec):
    return spec.avg_distance_spectrum()


# =========================================================
# Spectrum table
# =========================================================

class spectrum(object):

    '''
    ln of the average weight enumerator for h = 0..N.

    Zero entries are flagged in ``zero``; their ``log_counts`` slot is 0 and
    carries no meaning. ``skip_zero_weight`` is set once the table has been
    expurgated and h = 0 no longer takes part in bound sums.
    '''

    def __init__(self, n_vars, log_counts, zero, skip_zero_weight=False):
        log_counts = np.asarray(log_counts, dtype=float)
        zero = np.asarray(zero, dtype=bool)
        if log_counts.shape != (n_vars + 1,) or zero.shape != (n_vars + 1,):
            raise ValueError("invalid-spec: spectrum arrays must have length N+1 = {}".format(n_vars + 1))
        if not np.all(np.isfinite(log_counts[~zero])):
            raise ValueError("invalid-spec: non-zero spectrum entries must be finite")

        self.n_vars = int(n_vars)
        self.log_counts = _readOnly(np.where(zero, 0.0, log_counts))
        self.zero = _readOnly(zero)
        self.skip_zero_weight = bool(skip_zero_weight)

    def log_count(self, h):
        '''ln Abar_h, or None for a zero entry.'''
        if self.zero[h] or (h == 0 and self.skip_zero_weight):
            return None
        return float(self.log_counts[h])

    def weights(self):
        '''Weights contributing to bound sums.'''
        first = 1 if self.skip_zero_weight else 0
        return [h for h in range(first, self.n_vars + 1) if not self.zero[h]]

    def total(self):
        '''ln of the expected number of codewords counted by the table.'''
        hs = self.weights()
        if not hs:
            return float('-inf')
        return float(logsumexp(self.log_counts[hs]))

    #=======================================================================
    def expurgate(self, gamma, doubling=True):
        if gamma < 0 or gamma > self.n_vars:
            raise ValueError("invalid-spec: gamma must lie in 0..{}, got {}".format(self.n_vars, gamma))
        hs = np.arange(self.n_vars + 1)
        zero = self.zero | ((hs >= 1) & (hs <= gamma))
        log_counts = self.log_counts.copy()
        if doubling:
            log_counts[hs > gamma] += LN2
        return spectrum(self.n_vars, log_counts, zero, skip_zero_weight=True)

    #=======================================================================
    def to_dataframe(self):
        ln = np.where(self.zero, np.nan, self.log_counts)
        if self.skip_zero_weight:
            ln[0] = np.nan
        return pd.DataFrame({'h': np.arange(self.n_vars + 1),
                             'ln_avg_Ah': ln,
                             'zero_flag': self.zero.copy()})

    def to_csv(self, path):
        self.to_dataframe().to_csv(path, index=False, float_format=CSV_FLOAT_FORMAT)
        return path

    @classmethod
    def from_csv(cls, path):
        assert os.path.isfile(path), "{} does not exist.".format(path)
        df = pd.read_csv(path)
        zero = df['zero_flag'].astype(bool).to_numpy()
        ln = df['ln_avg_Ah'].fillna(0.0).to_numpy()
        skip = bool(np.isnan(df['ln_avg_Ah'].iloc[0])) and not zero[0]
        return cls(len(df) - 1, ln, zero, skip_zero_weight=skip)


def expurgate_spectrum(table, gamma, doubling=True):
    return table.expurgate(gamma, doubling=doubling)
