"""Average SINR per bit, its noiseless upper bound, and noise calibration.

Four regimes are covered: the transmit-correlated channel without precoding
and the precoded channel, each before and after combining over
retransmissions.  Antenna indices in the scalar helpers are 1-based; array
results are indexed from 0 (antenna 1 first).

Before combining the SINR per bit of antenna ``i`` is
``2 n_rt E|F_k,ii S_i|^2 / E|I_k,i + V_k,i|^2``; after combining it is
``2 P_av E[F_i^2] / E|U_i|^2``.  dB values are ``10 log10`` of the linear ratio.
"""

import csv
import dataclasses
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import moments
from .channel import ChannelConfig
from .errors import InfiniteSinrError, InvalidArgumentError, UnreachableTargetError
from .precoder import predictor_for

__all__ = [
    "REGIMES",
    "SinrReport",
    "SurfaceRecord",
    "to_db",
    "sinr_per_antenna",
    "sinr_report",
    "sinr_correlated",
    "sinr_correlated_ub",
    "sinr_correlated_combined",
    "sinr_correlated_combined_ub",
    "sinr_precoded",
    "sinr_precoded_ub",
    "sinr_precoded_combined",
    "sinr_precoded_combined_ub",
    "export_surface",
    "write_surface_csv",
    "calibrate_noise",
]

REGIMES = ("correlated-before", "correlated-after", "precoded-before", "precoded-after")


def to_db(x):
    with np.errstate(divide="ignore"):
        return 10.0 * np.log10(x)


def _parse_regime(regime):
    if regime not in REGIMES:
        raise InvalidArgumentError(f"unknown regime {regime!r}; expected one of {REGIMES}")
    kind, when = regime.split("-")
    return kind == "precoded", when == "after"


def _error_vars(cfg, precoded, predictor):
    if not precoded:
        return None
    predictor = predictor if predictor is not None else predictor_for(cfg)
    if predictor.order < cfg.n_t - 1:
        raise InvalidArgumentError(
            f"predictor order {predictor.order} is below n_t - 1 = {cfg.n_t - 1}"
        )
    return np.asarray(predictor.error_vars[: cfg.n_t])


def _signal_and_disturbance(cfg, regime, predictor=None):
    """Numerator, noiseless denominator and noise coefficient per antenna.

    ``SINR_i = num_i / (interf_i + coef_i * sigma2_w)``.
    """
    precoded, combined = _parse_regime(regime)
    ev = _error_vars(cfg, precoded, predictor)
    g2 = moments.gain_second_moment(cfg, combined, ev)
    if combined:
        num = 2.0 * cfg.p_av * g2
    else:
        num = cfg.p_av * g2 * 2.0 * cfg.n_rt
    interf = moments.interference_power(cfg, combined, ev)
    unit = dataclasses.replace(cfg, sigma2_w=1.0)
    coef = moments.noise_power(unit, combined, ev)
    return num, interf, coef


def sinr_per_antenna(cfg, regime, predictor=None, upper_bound=False):
    """Linear SINR per bit for every transmit antenna."""
    num, interf, coef = _signal_and_disturbance(cfg, regime, predictor)
    sigma2_w = 0.0 if upper_bound else cfg.sigma2_w
    den = interf + coef * sigma2_w
    if np.any(den <= 0):
        raise InfiniteSinrError(
            "no interference and no noise (n_t = 1 with sigma2_w = 0): SINR is unbounded"
        )
    return num / den


@dataclass(frozen=True)
class SinrReport:
    per_antenna: np.ndarray
    per_antenna_db: np.ndarray
    min_db: float
    regime: str
    is_upper_bound: bool


def sinr_report(cfg, regime, predictor=None, upper_bound=False):
    lin = sinr_per_antenna(cfg, regime, predictor, upper_bound)
    db = to_db(lin)
    return SinrReport(
        per_antenna=lin,
        per_antenna_db=db,
        min_db=float(db.min()),
        regime=regime,
        is_upper_bound=bool(upper_bound or cfg.sigma2_w == 0.0),
    )


def _one(cfg, i, regime, predictor=None, upper_bound=False):
    if not 1 <= i <= cfg.n_t:
        raise InvalidArgumentError(f"antenna index {i} outside 1..{cfg.n_t}")
    return float(sinr_per_antenna(cfg, regime, predictor, upper_bound)[i - 1])


def sinr_correlated(cfg, i):
    return _one(cfg, i, "correlated-before")


def sinr_correlated_ub(cfg, i):
    return _one(cfg, i, "correlated-before", upper_bound=True)


def sinr_correlated_combined(cfg, i):
    return _one(cfg, i, "correlated-after")


def sinr_correlated_combined_ub(cfg, i):
    return _one(cfg, i, "correlated-after", upper_bound=True)


def sinr_precoded(cfg, predictor, i):
    return _one(cfg, i, "precoded-before", predictor)


def sinr_precoded_ub(cfg, predictor, i):
    return _one(cfg, i, "precoded-before", predictor, upper_bound=True)


def sinr_precoded_combined(cfg, predictor, i):
    return _one(cfg, i, "precoded-after", predictor)


def sinr_precoded_combined_ub(cfg, predictor, i):
    return _one(cfg, i, "precoded-after", predictor, upper_bound=True)


@dataclass(frozen=True)
class SurfaceRecord:
    regime: str
    n_tot: int
    n_t: int
    n_r: int
    n_rt: int
    rho: float
    antenna_i: int
    sinr_db: float
    is_ub: bool


SURFACE_COLUMNS = ("regime", "N_tot", "N_t", "N_r", "N_rt", "rho", "antenna_i", "sinr_db", "is_ub")


def export_surface(n_tot, n_rt, rho, regime, n_t_values, sigma2_h=0.5, sigma2_w=0.0, path=None):
    """One record per ``(N_t, i)`` for a sweep over ``N_t`` at fixed ``N_tot``.

    ``sigma2_w = 0`` gives the upper bound.  A single transmit antenna with no
    noise has no finite SINR and is reported as ``inf``.  If ``path`` is given
    the records are also written as CSV.
    """
    _parse_regime(regime)
    records = []
    for n_t in n_t_values:
        n_t = int(n_t)
        if not 1 <= n_t < n_tot:
            raise InvalidArgumentError(f"N_t={n_t} leaves no receive antenna at N_tot={n_tot}")
        cfg = ChannelConfig(
            n_t=n_t, n_r=n_tot - n_t, n_rt=n_rt, sigma2_h=sigma2_h, sigma2_w=sigma2_w, rho=rho
        )
        try:
            db = to_db(sinr_per_antenna(cfg, regime))
        except InfiniteSinrError:
            db = np.full(n_t, np.inf)
        for i in range(n_t):
            records.append(
                SurfaceRecord(
                    regime=regime,
                    n_tot=n_tot,
                    n_t=n_t,
                    n_r=n_tot - n_t,
                    n_rt=n_rt,
                    rho=float(rho),
                    antenna_i=i + 1,
                    sinr_db=float(db[i]),
                    is_ub=sigma2_w == 0.0,
                )
            )
    if path is not None:
        write_surface_csv(records, path)
    return records


def write_surface_csv(records, path):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(SURFACE_COLUMNS)
        for r in records:
            writer.writerow(
                [r.regime, r.n_tot, r.n_t, r.n_r, r.n_rt, repr(r.rho), r.antenna_i,
                 repr(r.sinr_db), int(r.is_ub)]
            )


def calibrate_noise(cfg, target_sinr_db, regime="correlated-before", predictor=None, antennas=None):
    """Noise variance per dimension that puts the weakest antenna at the target.

    Every per-antenna SINR falls monotonically with ``sigma2_w``, so the
    minimum over ``antennas`` (1-based, default all) meets the target at the
    smallest of the per-antenna inversions.

    Raises
    ------
    UnreachableTargetError
        If the target is not below the noiseless bound of the weakest antenna.
    """
    num, interf, coef = _signal_and_disturbance(cfg, regime, predictor)
    if antennas is not None:
        sel = np.asarray(antennas, dtype=int) - 1
        if sel.size == 0 or sel.min() < 0 or sel.max() >= cfg.n_t:
            raise InvalidArgumentError("antenna selection out of range")
        num, interf, coef = num[sel], interf[sel], coef[sel]
    target = 10.0 ** (target_sinr_db / 10.0)
    with np.errstate(divide="ignore"):
        ub = np.where(interf > 0, num / np.where(interf > 0, interf, 1.0), np.inf)
    if np.any(target >= ub):
        raise UnreachableTargetError(target_sinr_db, float(to_db(ub.min())))
    sigma2 = (num / target - interf) / coef
    return float(sigma2.min())
