import dataclasses

import numpy as np
import pytest

from sumimo import moments
from sumimo.channel import (
    ChannelConfig,
    EqualizedFrame,
    draw_channel,
    effective_noise_variance,
    effective_noise_variance_correlated,
    matched_filter_combine,
    transmit_block,
)
from sumimo.errors import InvalidArgumentError


def qpsk(rng, shape):
    return (1 - 2 * rng.integers(0, 2, shape)) + 1j * (1 - 2 * rng.integers(0, 2, shape))


def test_white_channel_autocorrelation():
    rng = np.random.default_rng(0)
    h = draw_channel(ChannelConfig(n_t=2, n_r=500_000), rng)
    r0 = np.mean(np.abs(h[:, 0]) ** 2) / 2
    r1 = np.mean(h[:, 1] * h[:, 0].conj()).real / 2
    assert abs(r1 / r0) < 0.01


def test_ar1_channel_autocorrelation():
    rng = np.random.default_rng(1)
    cfg = ChannelConfig(n_t=3, n_r=1_000_000 // 3, rho=0.9, sigma2_h=0.5)
    h = draw_channel(cfg, rng)
    r = [np.mean(h[:, m] * h[:, 0].conj()).real / 2 for m in range(3)]
    assert abs(r[0] / 0.5 - 1) < 0.01
    assert abs(r[1] / r[0] - 0.9) < 0.01
    assert abs(r[2] / r[0] - 0.81) < 0.01
    # last column has the same power as the first one
    assert abs(np.mean(np.abs(h[:, 2]) ** 2) / 2 / 0.5 - 1) < 0.01


def test_rows_are_independent():
    rng = np.random.default_rng(3)
    cfg = ChannelConfig(n_t=4, n_r=2, rho=0.9)
    h = draw_channel(cfg, rng, size=200_000)
    c = np.mean(h[:, 0, :] * h[:, 1, :].conj(), axis=0) / 2
    # estimator std is about sigma2_h / sqrt(n)
    assert np.all(np.abs(c) < 3 * 0.5 * 2 / np.sqrt(200_000))


def test_noiseless_scalar_link():
    cfg = ChannelConfig(n_t=1, n_r=1)
    r = transmit_block(np.array([1 - 1j]), np.ones((1, 1, 1)), cfg, np.random.default_rng(0))
    assert np.allclose(r, [[1 - 1j]])


def test_noise_power():
    cfg = ChannelConfig(n_t=1, n_r=4, sigma2_w=0.7)
    rng = np.random.default_rng(4)
    r = transmit_block(np.zeros((100_000, 1)), np.zeros((100_000, 1, 4, 1)), cfg, rng)
    assert abs(np.mean(np.sum(np.abs(r) ** 2, axis=-1)) / (2 * 0.7 * 4) - 1) < 0.01


def test_identity_precoder_matches_plain_path():
    cfg = ChannelConfig(n_t=3, n_r=5, n_rt=2, sigma2_w=0.3)
    rng = np.random.default_rng(6)
    h = draw_channel(cfg, rng, size=(4, 2))
    s = qpsk(rng, (4, 3))
    a = transmit_block(s, h, cfg, np.random.default_rng(9))
    b = transmit_block(s, h, cfg, np.random.default_rng(9), precoder=np.eye(3))
    assert np.array_equal(a, b)


def test_dimension_mismatch():
    cfg = ChannelConfig(n_t=2, n_r=3)
    with pytest.raises(InvalidArgumentError):
        transmit_block(np.ones(3), np.ones((1, 3, 2)), cfg, np.random.default_rng(0))
    with pytest.raises(InvalidArgumentError):
        matched_filter_combine(np.ones((0, 3)), np.ones((0, 3, 2)))


def test_single_antenna_combining():
    cfg = ChannelConfig(n_t=1, n_r=6)
    rng = np.random.default_rng(7)
    h = draw_channel(cfg, rng, size=(1,))
    r = transmit_block(np.array([-1 + 1j]), h, cfg, rng)
    y, f = matched_filter_combine(r, h)
    g = np.sum(np.abs(h) ** 2)
    assert np.allclose(f, g)
    assert np.allclose(y, g * (-1 + 1j))


def test_gain_moments_uncorrelated():
    cfg = ChannelConfig(n_t=4, n_r=12, sigma2_h=0.5)
    rng = np.random.default_rng(8)
    h = draw_channel(cfg, rng, size=(100_000, 1))
    _, f = matched_filter_combine(np.zeros(h.shape[:-1], complex), h)
    assert np.allclose(f.mean(0), moments.mean_gain(cfg), rtol=0.01)
    assert np.allclose((f**2).mean(0), moments.gain_second_moment(cfg), rtol=0.02)


def test_y_minus_fs_has_zero_mean_and_f_ignores_noise():
    cfg = ChannelConfig(n_t=3, n_r=6, n_rt=2, sigma2_w=0.4)
    rng = np.random.default_rng(10)
    h = draw_channel(cfg, rng, size=(50_000, 2))
    s = qpsk(rng, (50_000, 3))
    r1 = transmit_block(s, h, cfg, np.random.default_rng(1))
    r2 = transmit_block(s, h, cfg, np.random.default_rng(2))
    y1, f1 = matched_filter_combine(r1, h)
    _, f2 = matched_filter_combine(r2, h)
    assert np.array_equal(f1, f2)
    u = y1 - f1 * s
    assert np.all(np.abs(u.mean(0)) < 4 * np.sqrt(np.mean(np.abs(u) ** 2, 0) / 50_000))


def test_equalized_frame_validation():
    eq = EqualizedFrame(np.ones(4), np.ones(4), 0.5)
    assert len(eq) == 4 and eq.sigma2_u.shape == (4,)
    with pytest.raises(InvalidArgumentError):
        EqualizedFrame(np.ones(4), -np.ones(4), 0.5)
    with pytest.raises(InvalidArgumentError):
        EqualizedFrame(np.ones(4), np.ones(3), 0.5)


def test_effective_noise_variance_values():
    cfg = ChannelConfig(n_t=1, n_r=7, n_rt=2, sigma2_w=0.3, sigma2_h=0.5)
    # per dimension, half the complex power 4 sigma2_w sigma2_h N_r / N_rt
    assert np.isclose(effective_noise_variance(cfg), 0.5 * 4 * 0.3 * 0.5 * 7 / 2)
    cfg2 = dataclasses.replace(cfg, n_rt=4)
    assert np.isclose(effective_noise_variance(cfg2), effective_noise_variance(cfg) / 2)
    with pytest.raises(InvalidArgumentError):
        effective_noise_variance(dataclasses.replace(cfg, rho=0.5))


def test_correlated_variance_reduces_to_uncorrelated():
    cfg = ChannelConfig(n_t=5, n_r=9, n_rt=3, sigma2_w=0.2)
    for i in range(1, 6):
        assert np.isclose(effective_noise_variance_correlated(cfg, i), effective_noise_variance(cfg))
    one = ChannelConfig(n_t=5, n_r=9, n_rt=1, sigma2_w=0.2, rho=0.7)
    for i in range(1, 6):
        assert np.isclose(effective_noise_variance_correlated(one, i, True),
                          effective_noise_variance_correlated(one, i, False))
    with pytest.raises(InvalidArgumentError):
        effective_noise_variance_correlated(cfg, 6)


def test_sigma2_u_against_monte_carlo():
    cfg = ChannelConfig(n_t=16, n_r=32, n_rt=2, sigma2_w=1.0, sigma2_h=0.5)
    rng = np.random.default_rng(11)
    acc, n = 0.0, 0
    for _ in range(10):
        h = draw_channel(cfg, rng, size=(1_000, 2))
        s = qpsk(rng, (1_000, 16))
        y, f = matched_filter_combine(transmit_block(s, h, cfg, rng), h)
        acc += np.sum(np.abs(y - f * s) ** 2)
        n += y.size
    assert abs(acc / n / 2 / effective_noise_variance(cfg) - 1) < 0.02
