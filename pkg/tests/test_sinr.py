import csv
import dataclasses

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from oracles import mc_moments
from sumimo import moments
from sumimo.channel import ChannelConfig
from sumimo.errors import InfiniteSinrError, UnreachableTargetError
from sumimo.precoder import predictor_for
from sumimo.sinr import (
    REGIMES,
    calibrate_noise,
    export_surface,
    sinr_correlated,
    sinr_correlated_combined,
    sinr_correlated_combined_ub,
    sinr_correlated_ub,
    sinr_per_antenna,
    sinr_precoded,
    sinr_precoded_combined,
    sinr_precoded_combined_ub,
    sinr_precoded_ub,
    sinr_report,
    to_db,
)


def ar1_precoder(n_t, rho):
    a = np.eye(n_t)
    for i in range(1, n_t):
        a[i, i - 1] = -rho
    return a.T


def cfg_1024(n_t, rho=0.9, n_rt=2, **kw):
    return ChannelConfig(n_t=n_t, n_r=1024 - n_t, n_rt=n_rt, rho=rho, **kw)


@pytest.mark.parametrize("n_t,expected", [(50, 18.6), (512, 6.0)])
def test_precoded_anchor(n_t, expected):
    cfg = cfg_1024(n_t)
    p = predictor_for(cfg)
    assert abs(to_db(sinr_precoded_ub(cfg, p, n_t)) - expected) <= 0.1
    assert abs(to_db(sinr_precoded_combined_ub(cfg, p, n_t)) - expected) <= 0.1


@given(st.integers(2, 40), st.integers(1, 64), st.integers(1, 4))
def test_uncorrelated_upper_bound(n_t, n_r, n_rt):
    cfg = ChannelConfig(n_t=n_t, n_r=n_r, n_rt=n_rt)
    ub = sinr_correlated_ub(cfg, 1)
    assert np.isclose(ub, 2 * n_rt * (n_r + 1) / (n_t - 1))
    assert np.isclose(sinr_precoded_ub(cfg, predictor_for(cfg), n_t), ub)


@given(st.integers(2, 30), st.integers(2, 60), st.floats(0.0, 0.95))
def test_single_transmission_regimes_coincide(n_t, n_r, rho):
    cfg = ChannelConfig(n_t=n_t, n_r=n_r, n_rt=1, rho=rho, sigma2_w=0.1)
    p = predictor_for(cfg)
    for i in (1, n_t):
        assert np.isclose(sinr_correlated_combined(cfg, i), sinr_correlated(cfg, i))
        assert np.isclose(sinr_precoded_combined(cfg, p, i), sinr_precoded(cfg, p, i))


@given(st.integers(2, 30), st.integers(2, 200), st.integers(1, 6), st.floats(0.0, 0.95))
def test_precoded_combined_ratio(n_t, n_r, n_rt, rho):
    cfg = ChannelConfig(n_t=n_t, n_r=n_r, n_rt=n_rt, rho=rho)
    p = predictor_for(cfg)
    ratio = sinr_precoded_combined_ub(cfg, p, n_t) / sinr_precoded_ub(cfg, p, n_t)
    assert abs(ratio - (n_r * n_rt + 1) / ((n_r + 1) * n_rt)) < 1e-12


def test_combined_never_beats_before_under_correlation():
    for n_t in (2, 6, 50, 512):
        before = sinr_per_antenna(cfg_1024(n_t), "correlated-before", upper_bound=True)
        after = sinr_per_antenna(cfg_1024(n_t), "correlated-after", upper_bound=True)
        assert np.all(after <= before)


def test_precoded_first_antenna_is_best():
    for n_t in (3, 10, 50):
        db = to_db(sinr_per_antenna(cfg_1024(n_t), "precoded-before", upper_bound=True))
        assert np.argmax(db) == 0
        assert np.argmin(db) != 0


@given(st.sampled_from(REGIMES), st.floats(0.01, 10.0), st.floats(1.01, 5.0))
def test_sinr_decreases_with_noise(regime, s2w, factor):
    cfg = ChannelConfig(n_t=6, n_r=20, n_rt=2, rho=0.7, sigma2_w=s2w)
    lo = sinr_per_antenna(cfg, regime)
    hi = sinr_per_antenna(dataclasses.replace(cfg, sigma2_w=s2w * factor), regime)
    ub = sinr_per_antenna(cfg, regime, upper_bound=True)
    assert np.all(hi < lo) and np.all(lo <= ub)


@pytest.mark.parametrize("regime", REGIMES)
def test_rho_to_zero_limit(regime):
    a = sinr_per_antenna(ChannelConfig(n_t=5, n_r=9, n_rt=2, sigma2_w=0.3, rho=1e-9), regime)
    b = sinr_per_antenna(ChannelConfig(n_t=5, n_r=9, n_rt=2, sigma2_w=0.3), regime)
    assert np.allclose(a, b, rtol=1e-8)


@pytest.mark.parametrize("regime", REGIMES)
def test_scale_invariance_in_sigma2_h(regime):
    a = sinr_per_antenna(ChannelConfig(n_t=5, n_r=9, n_rt=2, rho=0.6, sigma2_h=0.5, sigma2_w=0.2), regime)
    b = sinr_per_antenna(ChannelConfig(n_t=5, n_r=9, n_rt=2, rho=0.6, sigma2_h=2.0, sigma2_w=0.8), regime)
    assert np.allclose(a, b)


def test_infinite_sinr():
    cfg = ChannelConfig(n_t=1, n_r=1)
    with pytest.raises(InfiniteSinrError):
        sinr_correlated_ub(cfg, 1)


def test_report():
    rep = sinr_report(cfg_1024(8, sigma2_w=0.1), "correlated-after")
    assert rep.min_db == rep.per_antenna_db.min()
    assert np.all(rep.per_antenna > 0) and not rep.is_upper_bound


def test_surface_export(tmp_path):
    path = tmp_path / "s.csv"
    recs = export_surface(1024, 2, 0.9, "precoded-before", [1, 2, 50], path=path)
    assert len(recs) == 1 + 2 + 50
    row = [r for r in recs if r.n_t == 50 and r.antenna_i == 50][0]
    assert abs(row.sinr_db - 18.6) <= 0.1
    with path.open() as fh:
        rows = list(csv.reader(fh))
    assert rows[0] == ["regime", "N_tot", "N_t", "N_r", "N_rt", "rho", "antenna_i", "sinr_db", "is_ub"]
    assert len(rows) == 54
    assert rows[1][7] == "inf"


def test_calibration_round_trip():
    for regime in REGIMES:
        cfg = ChannelConfig(n_t=8, n_r=24, n_rt=2, rho=0.5)
        ub = to_db(sinr_per_antenna(cfg, regime, upper_bound=True)).min()
        s2w = calibrate_noise(cfg, ub - 3.0, regime)
        got = to_db(sinr_per_antenna(dataclasses.replace(cfg, sigma2_w=s2w), regime)).min()
        assert abs(got - (ub - 3.0)) < 1e-9


def test_calibration_unreachable():
    cfg = cfg_1024(512, rho=0.0)
    with pytest.raises(UnreachableTargetError) as exc:
        calibrate_noise(cfg, 10.0)
    assert exc.value.ub_db == pytest.approx(10 * np.log10(4 * 513 / 511))


def test_calibration_against_monte_carlo():
    cfg = ChannelConfig(n_t=1, n_r=1, n_rt=1)
    s2w = calibrate_noise(cfg, 4.0)
    rng = np.random.default_rng(3)
    n = 1_000_000
    h = np.sqrt(0.5) * (rng.standard_normal(n) + 1j * rng.standard_normal(n))
    w = np.sqrt(s2w) * (rng.standard_normal(n) + 1j * rng.standard_normal(n))
    f = np.abs(h) ** 2
    signal = 2.0 * np.mean(f**2)  # P_av E[F^2]
    noise = np.mean(np.abs(h.conj() * w) ** 2)
    assert abs(10 * np.log10(signal * 2 / noise) - 4.0) < 0.1


CASES = [
    dict(n_t=8, n_r=16, n_rt=1, rho=0.9),
    dict(n_t=8, n_r=16, n_rt=2, rho=0.9),
    dict(n_t=16, n_r=32, n_rt=2, rho=0.0),
]


@pytest.mark.slow
@pytest.mark.parametrize("case", CASES)
def test_moments_against_monte_carlo(case):
    cfg = ChannelConfig(sigma2_w=1.0, **case)
    mc = mc_moments(realizations=40_000, seed=1, **case)
    for combined, tag in ((False, "before"), (True, "after")):
        assert np.allclose(mc[f"gain2_{tag}"], moments.gain_second_moment(cfg, combined), rtol=0.02)
        assert np.allclose(mc[f"interf_{tag}"], moments.interference_power(cfg, combined), rtol=0.02)
        assert np.allclose(mc[f"noise_{tag}"], moments.noise_power(cfg, combined), rtol=0.02)


@pytest.mark.slow
def test_precoded_moments_against_monte_carlo():
    n_t, n_r, n_rt, rho = 8, 16, 2, 0.9
    cfg = ChannelConfig(n_t=n_t, n_r=n_r, n_rt=n_rt, rho=rho, sigma2_w=1.0)
    ev = predictor_for(cfg).error_vars
    mc = mc_moments(n_t, n_r, n_rt, rho, precoder=ar1_precoder(n_t, rho), realizations=40_000, seed=2)
    for combined, tag in ((False, "before"), (True, "after")):
        assert np.allclose(mc[f"gain2_{tag}"], moments.gain_second_moment(cfg, combined, ev), rtol=0.02)
        assert np.allclose(mc[f"interf_{tag}"], moments.interference_power(cfg, combined, ev), rtol=0.02)
        assert np.allclose(mc[f"noise_{tag}"], moments.noise_power(cfg, combined, ev), rtol=0.02)
