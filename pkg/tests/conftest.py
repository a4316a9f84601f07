import numpy as np
import pytest

from ldpcert import tanner, ensemble, codewords


@pytest.fixture
def cycle_code():
    '''Three degree-2 checks on a 3-cycle; codewords {000, 111}.'''
    return tanner.from_dense([[1, 1, 0],
                              [0, 1, 1],
                              [1, 0, 1]])


@pytest.fixture
def dmin2_code():
    '''Columns 0 and 1 are identical, so 1100... is a weight-2 codeword.'''
    return tanner.from_dense([[1, 1, 1, 0, 0, 1],
                              [1, 1, 0, 1, 0, 0],
                              [0, 0, 1, 1, 1, 0],
                              [0, 0, 0, 1, 1, 1]])


@pytest.fixture
def hamming_code():
    return tanner.from_dense([[1, 0, 1, 0, 1, 0, 1],
                              [0, 1, 1, 0, 0, 1, 1],
                              [0, 0, 0, 1, 1, 1, 1]])


@pytest.fixture
def zero_only_code():
    '''Every triple of four bits has even parity only for the zero word.'''
    return tanner(4, 4, [[0, 1, 2], [0, 1, 3], [0, 2, 3], [1, 2, 3]])


@pytest.fixture
def small_codes():
    '''Exhaustively enumerable (3,4)-regular codes, N <= 16.'''
    return [ensemble(n, 3, 4).sample_regular_code(seed) for n, seed in ((12, 1), (12, 5), (16, 2), (16, 9))]


def brute_force_ml(h, llrs):
    '''(argmin codeword, min cost, all costs) over every codeword.'''
    words = codewords(h)
    costs = words.astype(float).dot(np.asarray(llrs, dtype=float))
    k = int(np.argmin(costs))
    return words[k], float(costs[k]), costs
