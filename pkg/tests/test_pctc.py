import numpy as np
import pytest
from scipy.special import expit

import oracles
from sumimo.channel import EqualizedFrame
from sumimo.codes import make_interleaver
from sumimo.errors import InvalidArgumentError
from sumimo.pctc import pctc_decode, pctc_encode


def test_encoding_layout():
    rng = np.random.default_rng(0)
    a = rng.integers(0, 2, 16)
    il = make_interleaver(16, 3)
    fr = pctc_encode(a, il)
    a2 = il.interleave(a)
    assert np.array_equal(fr.p1, oracles.shift_register_parity(a))
    assert np.array_equal(fr.p2, oracles.shift_register_parity(a2))
    assert np.array_equal(fr.s.real, oracles.antipodal(np.concatenate([a, a2])))
    assert np.array_equal(fr.s.imag, oracles.antipodal(np.concatenate([fr.p1, fr.p2])))
    assert fr.s.size == 32


def test_zero_data():
    fr = pctc_encode(np.zeros(8, int), make_interleaver(8, 1))
    assert np.all(fr.s == 1 + 1j)


@pytest.mark.parametrize("seed", range(10))
def test_one_iteration_matches_oracle(seed):
    rng = np.random.default_rng(seed)
    n = 6
    il = make_interleaver(n, seed + 11)
    fr = pctc_encode(rng.integers(0, 2, n), il)
    f = rng.uniform(0.6, 1.5, 2 * n)
    sigma2 = rng.uniform(0.4, 1.2, 2 * n)
    y = f * fr.s + np.sqrt(0.7) * (rng.standard_normal(2 * n) + 1j * rng.standard_normal(2 * n))
    want = oracles.pctc_one_iteration(y, f, sigma2, il.pi)
    _, llr = pctc_decode(EqualizedFrame(y, f, sigma2), il, iterations=1)
    assert np.allclose(expit(llr), want[:, 0], atol=1e-9)


def test_zero_observation_is_undecided():
    il = make_interleaver(8, 2)
    _, llr = pctc_decode(EqualizedFrame(np.zeros(16), np.ones(16), 1.0), il, 3)
    assert np.allclose(llr, 0)


def test_noiseless_frame_decodes():
    rng = np.random.default_rng(4)
    il = make_interleaver(256, 4)
    a = rng.integers(0, 2, 256)
    fr = pctc_encode(a, il)
    a_hat, _ = pctc_decode(EqualizedFrame(fr.s, np.ones(512), 0.05), il, 2)
    assert np.array_equal(a_hat, a)


def test_diagnostics_and_length_check():
    il = make_interleaver(8, 2)
    fr = pctc_encode(np.ones(8, int), il)
    diag = {}
    pctc_decode(EqualizedFrame(fr.s, np.ones(16), 0.5), il, 2, diagnostics=diag)
    assert diag["prior_llr"].shape == diag["extrinsic_llr"].shape == (8,)
    with pytest.raises(InvalidArgumentError):
        pctc_decode(EqualizedFrame(fr.s[:8], np.ones(8), 0.5), il)
    with pytest.raises(InvalidArgumentError):
        pctc_encode(np.ones(4, int), il)
