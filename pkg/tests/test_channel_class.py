import math

import numpy as np
import pytest

from ldpcert import mbios, channel_from_spec, transmit, llr, reflect


def test_bsc_llr_values():
    ch = mbios.bsc(0.14)
    out = ch.llr(np.array([0, 1]))
    assert out[0] == pytest.approx(1.81529, abs=1e-5)
    assert out[1] == -out[0]


def test_bsc_half_is_uninformative():
    ch = mbios.bsc(0.5)
    assert np.all(ch.llr(np.array([0, 1, 1, 0])) == 0.0)


@pytest.mark.parametrize('p', [0.0, 1.0, 1e-13, 1.5])
def test_bsc_rejects_degenerate(p):
    with pytest.raises(ValueError):
        mbios.bsc(p)


def test_transmit_near_noiseless():
    ch = mbios.bsc(1e-12)
    y = transmit(np.zeros(1000, dtype=np.int8), ch, 1)
    assert np.count_nonzero(y) <= 1


@pytest.mark.parametrize('p', [0.14, 0.5])
def test_transmit_flip_rate(p):
    n = 100000
    y = mbios.bsc(p).transmit(np.zeros(n, dtype=np.int8), 42)
    sigma = math.sqrt(p * (1 - p) / n)
    assert abs(y.mean() - p) <= 3 * sigma


def test_transmit_deterministic():
    ch = mbios.bsc(0.1)
    word = np.random.default_rng(0).integers(0, 2, 200)
    assert np.array_equal(ch.transmit(word, 5), ch.transmit(word, 5))


def test_unknown_symbol():
    with pytest.raises(ValueError, match='unknown-symbol'):
        llr(mbios.bsc(0.1), np.array([0, 2]))


def test_reflect_identity_and_involution():
    ch = mbios.bsc(0.2)
    rng = np.random.default_rng(3)
    y = rng.integers(0, 2, 50)
    c = rng.integers(0, 2, 50)
    assert np.array_equal(reflect(y, np.zeros(50, dtype=np.int8), ch), y)
    assert np.array_equal(reflect(reflect(y, c, ch), c, ch), y)


def test_reflect_length_mismatch():
    with pytest.raises(ValueError, match='length-mismatch'):
        mbios.bsc(0.2).reflect(np.array([0, 1, 0]), np.array([1, 0]))


@pytest.mark.parametrize('ch', [mbios.bsc(0.14), mbios.quantized_awgn(0.8, 6), mbios.quantized_awgn(0.5, 5)])
def test_llr_symmetry_under_reflection(ch):
    rng = np.random.default_rng(8)
    y = ch.transmit(rng.integers(0, 2, 300), 9)
    c = rng.integers(0, 2, 300)
    signs = np.where(c == 1, -1.0, 1.0)
    assert np.array_equal(ch.llr(ch.reflect(y, c)), signs * ch.llr(y))


class TestTables:

    def test_from_table(self):
        ch = mbios.from_table([-1, 0, 1], [0.1, 0.2, 0.7], [0.7, 0.2, 0.1])
        assert ch.llr(np.array([0]))[0] == 0.0
        assert ch.llr(np.array([1]))[0] == pytest.approx(math.log(7.0))
        assert ch.bhattacharyya() == pytest.approx(2 * math.sqrt(0.07) + 0.2)

    def test_asymmetric_table_rejected(self):
        with pytest.raises(ValueError, match='symmetric'):
            mbios.from_table([-1, 1], [0.3, 0.7], [0.6, 0.4])

    def test_rows_must_sum_to_one(self):
        with pytest.raises(ValueError):
            mbios.from_table([-1, 1], [0.3, 0.6], [0.6, 0.3])

    def test_missing_mirror(self):
        with pytest.raises(ValueError, match='mirror'):
            mbios.from_table([-1, 2], [0.5, 0.5], [0.5, 0.5])

    def test_csv(self, tmp_path):
        path = tmp_path / 'ch.csv'
        path.write_text('y,q0,q1\n-1,0.2,0.8\n1,0.8,0.2\n')
        ch = channel_from_spec(str(path))
        assert ch.llr(np.array([1]))[0] == pytest.approx(math.log(4.0))

    def test_quantized_awgn_is_valid(self):
        ch = mbios.quantized_awgn(0.9, 8)
        assert len(ch.symbols) == 8
        assert ch.q0.sum() == pytest.approx(1.0, abs=1e-12)
        # More reliable bins carry larger LLRs
        assert np.all(np.diff(ch.llr_table) > 0)

    def test_awgn_transmission_statistics(self):
        ch = mbios.quantized_awgn(0.7, 4)
        y = ch.transmit(np.zeros(200000, dtype=np.int8), 4)
        freq = np.array([np.mean(y == s) for s in ch.symbols])
        np.testing.assert_allclose(freq, ch.q0, atol=5e-3)


def test_channel_spec_strings():
    assert channel_from_spec('bsc:0.08').crossover == 0.08
    assert len(channel_from_spec('awgn:0.8:4').symbols) == 4
    with pytest.raises(ValueError):
        channel_from_spec('gauss')
