'''
Memoryless binary-input output-symmetric (MBIOS) channels over a finite
output alphabet.
'''

import os

import numpy as np
import pandas as pd
from scipy import stats

P_MIN = 1e-12
P_MAX = 1.0 - 1e-12
ROW_TOL = 1e-12
SYMMETRY_TOL = 1e-12


class mbios(object):

    '''
    Finite-alphabet MBIOS channel.

    ``symbols`` is the sorted output alphabet, ``q0``/``q1`` the transition
    probabilities Q(y|0), Q(y|1) and ``mirror[k]`` the index of the symbol
    paired with symbols[k] by the output involution. The BSC uses the bit
    alphabet {0, 1} with involution y -> 1 - y; tabulated channels use signed
    labels with involution y -> -y.
    '''

    #=======================================================================
    def __init__(self, symbols, q0, q1, mirror, kind='table', crossover=None):
        symbols = np.asarray(symbols)
        q0 = np.asarray(q0, dtype=float)
        q1 = np.asarray(q1, dtype=float)
        mirror = np.asarray(mirror, dtype=np.int64)

        if not (symbols.shape == q0.shape == q1.shape == mirror.shape) or symbols.ndim != 1:
            raise ValueError("invalid-spec: channel table columns must have equal length")
        if len(np.unique(symbols)) != len(symbols):
            raise ValueError("invalid-spec: output alphabet has repeated symbols")
        if np.any(q0 <= 0) or np.any(q0 >= 1) or np.any(q1 <= 0) or np.any(q1 >= 1):
            raise ValueError("invalid-spec: transition probabilities must lie strictly inside (0,1)")
        if abs(q0.sum() - 1.0) > ROW_TOL or abs(q1.sum() - 1.0) > ROW_TOL:
            raise ValueError("invalid-spec: Q(.|0) and Q(.|1) must each sum to 1 (got {} and {})".format(q0.sum(), q1.sum()))
        if np.any(mirror[mirror] != np.arange(len(mirror))):
            raise ValueError("invalid-spec: output pairing is not an involution")
        if np.max(np.abs(q0 - q1[mirror])) > SYMMETRY_TOL:
            raise ValueError("invalid-spec: channel is not output-symmetric, Q(y|0) != Q(-y|1)")

        order = np.argsort(symbols, kind='stable')
        rank = np.empty_like(order)
        rank[order] = np.arange(len(order))

        self.kind = kind
        self.crossover = crossover
        self.symbols = symbols[order]
        self.q0 = q0[order]
        self.q1 = q1[order]
        self.mirror = rank[mirror[order]]
        self.log_q0 = np.log(self.q0)
        self.log_q1 = np.log(self.q1)
        self.llr_table = self._llrTable()

        for arr in (self.symbols, self.q0, self.q1, self.mirror, self.log_q0, self.log_q1, self.llr_table):
            arr.setflags(write=False)

    #=======================================================================
    def _llrTable(self):
        # Mirror pairs get exactly opposite values
        table = np.zeros(len(self.symbols), dtype=float)
        for k, m in enumerate(self.mirror):
            if k < m:
                v = self.log_q0[k] - self.log_q1[k]
                table[k] = v
                table[m] = -v
        return table

    #=======================================================================
    @classmethod
    def bsc(cls, p):
        p = float(p)
        if not (P_MIN <= p <= P_MAX):
            raise ValueError("invalid-spec: BSC crossover must lie in [{}, {}], got {}".format(P_MIN, P_MAX, p))
        return cls([0, 1], [1.0 - p, p], [p, 1.0 - p], [1, 0], kind='bsc', crossover=p)

    @classmethod
    def from_table(cls, symbols, q0, q1):
        '''Signed-label table; symbol y is paired with -y.'''
        symbols = np.asarray(symbols)
        lookup = {s: k for k, s in enumerate(symbols.tolist())}
        mirror = []
        for s in symbols.tolist():
            if -s not in lookup:
                raise ValueError("invalid-spec: symbol {} has no mirror {} in the alphabet".format(s, -s))
            mirror.append(lookup[-s])
        return cls(symbols, q0, q1, mirror, kind='table')

    @classmethod
    def from_csv(cls, path):
        '''CSV with one row per symbol: y, Q(y|0), Q(y|1).'''
        assert os.path.isfile(path), "{} does not exist.".format(path)
        df = pd.read_csv(path)
        if df.shape[1] < 3:
            raise ValueError("invalid-spec: channel CSV needs columns y, Q(y|0), Q(y|1)")
        return cls.from_table(df.iloc[:, 0].to_numpy(), df.iloc[:, 1].to_numpy(), df.iloc[:, 2].to_numpy())

    @classmethod
    def quantized_awgn(cls, sigma, levels, edge=2.0):
        '''
        BPSK over AWGN (0 -> +1, 1 -> -1) with the receiver output quantised
        to ``levels`` uniform bins on [-edge, edge], open at both ends.
        Symbols are odd integers -(levels-1), ..., levels-1.
        '''
        if sigma <= 0 or levels < 2:
            raise ValueError("invalid-spec: need sigma > 0 and at least two levels")
        inner = np.linspace(-edge, edge, levels + 1)[1:-1]
        cuts = np.concatenate([[-np.inf], inner, [np.inf]])
        q0 = np.diff(stats.norm.cdf((cuts - 1.0) / sigma))
        # Q(y|1) is Q(-y|0); bins are symmetric about 0
        q1 = q0[::-1].copy()
        symbols = np.arange(-(levels - 1), levels, 2)
        return cls.from_table(symbols, q0, q1)

    #=======================================================================
    def bhattacharyya(self):
        return float(np.sum(np.sqrt(self.q0 * self.q1)))

    def to_dataframe(self):
        return pd.DataFrame({'y': self.symbols, 'q0': self.q0, 'q1': self.q1})

    def to_dict(self):
        if self.kind == 'bsc':
            return {'kind': 'bsc', 'p': self.crossover}
        return {'kind': self.kind, 'symbols': self.symbols.tolist(), 'q0': self.q0.tolist(), 'q1': self.q1.tolist()}

    def __repr__(self):
        if self.kind == 'bsc':
            return 'mbios.bsc({})'.format(self.crossover)
        return 'mbios({} symbols)'.format(len(self.symbols))

    #=======================================================================
    def _symbolIndex(self, outputs):
        outputs = np.asarray(outputs)
        idx = np.searchsorted(self.symbols, outputs)
        idx = np.clip(idx, 0, len(self.symbols) - 1)
        bad = self.symbols[idx] != outputs
        if np.any(bad):
            raise ValueError("unknown-symbol: {} is not in the output alphabet".format(outputs[bad][0]))
        return idx

    def transmit(self, word, rng_seed):
        word = np.asarray(word).astype(np.int64)
        rng = np.random.default_rng(rng_seed)
        u = rng.random(word.shape)

        if self.kind == 'bsc':
            flips = u < self.crossover
            return np.asarray(word ^ flips, dtype=np.int64)

        cdf0 = np.cumsum(self.q0)
        cdf1 = np.cumsum(self.q1)
        last = len(self.symbols) - 1
        idx = np.where(word == 0,
                       np.minimum(np.searchsorted(cdf0, u, side='right'), last),
                       np.minimum(np.searchsorted(cdf1, u, side='right'), last))
        return self.symbols[idx]

    def llr(self, outputs):
        return self.llr_table[self._symbolIndex(outputs)]

    def reflect(self, outputs, word):
        idx = self._symbolIndex(outputs)
        word = np.asarray(word)
        if word.shape != idx.shape:
            raise ValueError("length-mismatch: {} outputs against a word of length {}".format(idx.size, word.size))
        idx = np.where(word.astype(bool), self.mirror[idx], idx)
        return self.symbols[idx]


# =========================================================
# Module-level operations
# =========================================================

def channel_from_spec(text):
    '''
    "bsc:0.08", "awgn:<sigma>:<levels>" or a path to a channel CSV.
    '''
    text = str(text).strip()
    if text.lower().startswith('bsc:'):
        return mbios.bsc(float(text.split(':', 1)[1]))
    if text.lower().startswith('awgn:'):
        parts = text.split(':')
        if len(parts) != 3:
            raise ValueError("invalid-spec: expected awgn:<sigma>:<levels>, got {}".format(text))
        return mbios.quantized_awgn(float(parts[1]), int(parts[2]))
    if os.path.isfile(text):
        return mbios.from_csv(text)
    raise ValueError("invalid-spec: unrecognised channel {}".format(text))


def transmit(word, ch, rng_seed):
    return ch.transmit(word, rng_seed)


def llr(ch, outputs):
    return ch.llr(outputs)


def reflect(outputs, word, ch):
    return ch.reflect(outputs, word)
