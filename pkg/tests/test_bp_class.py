import numpy as np
import pytest

from ldpcert import bp_decode, ensemble, mbios
from ldpcert.bp_class import _hardDecision
from ldpcert.code_class import random_codeword


def test_strong_channel_converges_immediately(hamming_code):
    out = bp_decode(hamming_code, np.full(7, 5.0))
    assert out.converged and out.is_codeword
    assert out.iterations_used == 1
    assert not out.hard_decision.any()


def test_cycle_code_corrects_single_error(cycle_code):
    out = bp_decode(cycle_code, [2.0, 2.0, -1.0])
    assert out.is_codeword
    assert np.array_equal(out.hard_decision, [0, 0, 0])


def test_hard_decision_is_codeword_flag(hamming_code):
    rng = np.random.default_rng(1)
    for _ in range(20):
        out = bp_decode(hamming_code, rng.normal(0.5, 1.5, 7), max_iterations=10)
        assert out.is_codeword == hamming_code.is_codeword(out.hard_decision)
        assert 1 <= out.iterations_used <= 10


def test_cap_reached_without_codeword(zero_only_code):
    # Only the zero word is a codeword. With every LLR at -0.3 the check
    # messages stay below 0.05, so each posterior stays negative.
    out = bp_decode(zero_only_code, np.full(4, -0.3), max_iterations=7)
    assert not out.is_codeword
    assert np.array_equal(out.hard_decision, [1, 1, 1, 1])
    assert np.all(out.posterior < 0)
    assert out.iterations_used == 7
    assert not out.converged


def test_deterministic():
    code = ensemble(60, 3, 4).sample_regular_code(4)
    llrs = np.random.default_rng(2).normal(0.8, 1.2, 60)
    a = bp_decode(code, llrs)
    b = bp_decode(code, llrs)
    assert np.array_equal(a.hard_decision, b.hard_decision)
    assert a.iterations_used == b.iterations_used
    assert np.array_equal(a.posterior, b.posterior)


def test_codeword_symmetry():
    ch = mbios.bsc(0.1)
    checked = 0
    for n, seed in ((20, 0), (32, 1), (48, 2), (40, 3)):
        code = ensemble(n, 3, 4).sample_regular_code(seed)
        rng = np.random.default_rng(seed)
        for t in range(30):
            y = ch.transmit(np.zeros(n, dtype=np.int8), 1000 * seed + t)
            c = random_codeword(code, rng)
            base = bp_decode(code, ch.llr(y), max_iterations=30)
            moved = bp_decode(code, ch.llr(ch.reflect(y, c)), max_iterations=30)
            assert np.array_equal(moved.hard_decision, base.hard_decision ^ c)
            assert moved.iterations_used == base.iterations_used
            checked += 1
    assert checked >= 100


class TestTies:

    @pytest.mark.parametrize('n,seed,var', [(3, None, 0), (20, 0, 5), (32, 1, 17)])
    def test_exact_zero_posterior_keeps_symmetry(self, cycle_code, n, seed, var):
        code = cycle_code if seed is None else ensemble(n, 3, 4).sample_regular_code(seed)
        rng = np.random.default_rng(n)
        llrs = rng.normal(0.5, 1.0, n)

        # In the first iteration the messages into var do not depend on its
        # own LLR, so feeding back their sum cancels the posterior exactly
        llrs[var] = 0.0
        incoming = bp_decode(code, llrs, max_iterations=1).posterior[var]
        assert incoming != 0.0
        llrs[var] = -incoming

        base = bp_decode(code, llrs, max_iterations=1)
        assert base.posterior[var] == 0.0
        assert base.hard_decision[var] == int(llrs[var] < 0)

        # every check has even degree, so the all-ones word is a codeword
        words = [np.ones(n, dtype=np.int8)] + [random_codeword(code, rng) for _ in range(5)]
        for c in words:
            # reflection through a codeword negates the LLRs on its support
            moved = bp_decode(code, np.where(c == 1, -llrs, llrs), max_iterations=1)
            assert moved.posterior[var] == 0.0
            assert np.array_equal(moved.hard_decision, base.hard_decision ^ c)

    def test_zero_posterior_follows_channel(self):
        bits = _hardDecision(np.array([0.0, 0.0, -1.0, 2.0]), np.array([-1.0, 1.0, 3.0, -3.0]))
        assert np.array_equal(bits, [1, 0, 1, 0])

    def test_double_zero_decides_zero(self):
        assert np.array_equal(_hardDecision(np.zeros(3), np.zeros(3)), [0, 0, 0])


class TestErrors:

    def test_length_mismatch(self, hamming_code):
        with pytest.raises(ValueError, match='length-mismatch'):
            bp_decode(hamming_code, np.zeros(6))

    def test_iteration_cap(self, hamming_code):
        with pytest.raises(ValueError, match='invalid-spec'):
            bp_decode(hamming_code, np.zeros(7), max_iterations=0)

    def test_non_finite(self, hamming_code):
        llrs = np.zeros(7)
        llrs[2] = np.inf
        with pytest.raises(ValueError):
            bp_decode(hamming_code, llrs)
