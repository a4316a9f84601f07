'''
Approximate ML certificate: the BP output is a codeword whose objective is
within delta of the LP optimum.
'''

from dataclasses import dataclass, asdict

import numpy as np

from .lp_class import objective


@dataclass(frozen=True)
class AmlcVerdict:
    holds: bool
    gap: float
    is_codeword: bool
    delta: float
    tolerance_margin: float

    def to_dict(self):
        return asdict(self)


def amlc_check(bp, lp, llrs, delta, h):
    '''
    holds = BP codeword and P(c_hat) - P(lambda) <= delta + certified_gap.

    ``gap`` is None when the BP output is not a codeword.
    '''
    llrs = np.asarray(llrs, dtype=float)
    n = h.n_vars
    if llrs.shape != (n,) or bp.hard_decision.shape != (n,) or lp.pseudocodeword.shape != (n,):
        raise ValueError("mismatched-instance: BP, LP and LLR vectors must all have length {}".format(n))
    if delta < 0:
        raise ValueError("domain-error: delta must be >= 0, got {}".format(delta))

    is_cw = bool(h.is_codeword(bp.hard_decision))
    if not is_cw:
        return AmlcVerdict(False, None, False, float(delta), float(lp.certified_gap))

    gap = objective(bp.hard_decision, llrs) - lp.objective
    holds = gap <= delta + lp.certified_gap
    return AmlcVerdict(bool(holds), float(gap), True, float(delta), float(lp.certified_gap))
