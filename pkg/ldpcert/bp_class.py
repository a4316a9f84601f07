'''
Sum-product belief propagation in the LLR domain, flooding schedule.
'''

from dataclasses import dataclass, field

import numpy as np

LLR_CLIP = 30.0
TANH_CLIP = 1.0 - 1e-15


@dataclass(frozen=True)
class BpOutcome:
    hard_decision: np.ndarray
    is_codeword: bool
    iterations_used: int
    converged: bool
    posterior: np.ndarray = field(repr=False, compare=False)


def _hardDecision(posterior, llrs):
    '''
    Bit 1 where the posterior LLR is negative. An exact zero posterior falls
    back to the channel LLR, and decides 0 only if that is zero as well.
    '''
    bits = posterior < 0
    ties = posterior == 0
    bits[ties] = llrs[ties] < 0
    return bits.astype(np.int8)


def _checkUpdate(h, v2c):
    '''Leave-one-out tanh rule over every check at once.'''
    t = np.tanh(np.clip(v2c, -LLR_CLIP, LLR_CLIP) / 2.0)
    slots = np.append(t, 1.0)[h.check_slots]

    ones = np.ones((slots.shape[0], 1))
    prefix = np.cumprod(np.hstack([ones, slots[:, :-1]]), axis=1)
    suffix = np.cumprod(np.hstack([ones, slots[:, :0:-1]]), axis=1)[:, ::-1]
    loo = np.clip(prefix * suffix, -TANH_CLIP, TANH_CLIP)

    msgs = np.clip(2.0 * np.arctanh(loo), -LLR_CLIP, LLR_CLIP)

    c2v = np.zeros(h.n_edges)
    real = h.check_slots < h.n_edges
    c2v[h.check_slots[real]] = msgs[real]
    return c2v


def bp_decode(h, llrs, max_iterations=100):
    '''
    Decode with sum-product BP.

    Parameters
    ----------
    h : tanner
        Parity-check matrix.
    llrs : array
        Channel LLRs ln Q(y|0)/Q(y|1).
    max_iterations : int
        Iteration cap. The syndrome is tested after every iteration and
        decoding stops at the first codeword.

    Returns
    -------
    BpOutcome
    '''
    llrs = np.asarray(llrs, dtype=float)
    if llrs.shape != (h.n_vars,):
        raise ValueError("length-mismatch: {} LLRs for a code of length {}".format(llrs.size, h.n_vars))
    if max_iterations < 1:
        raise ValueError("invalid-spec: max_iterations must be >= 1, got {}".format(max_iterations))
    if not np.all(np.isfinite(llrs)):
        raise ValueError("invalid-spec: LLRs must be finite")

    v2c = llrs[h.edge_var].copy()

    for it in range(1, max_iterations + 1):
        c2v = _checkUpdate(h, v2c)

        incoming = np.append(c2v, 0.0)[h.var_slots]
        posterior = llrs + incoming.sum(axis=1)
        v2c = posterior[h.edge_var] - c2v

        hard = _hardDecision(posterior, llrs)
        if h.is_codeword(hard):
            return BpOutcome(hard, True, it, True, posterior)

    return BpOutcome(hard, False, max_iterations, False, posterior)
