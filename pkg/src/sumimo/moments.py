"""Closed-form second and fourth moments of the matched-filter output.

Quantities are complex powers (``E|x|^2``), returned per transmit antenna as
arrays of length ``n_t`` (index 0 is antenna 1).  "Before combining" refers to
a single retransmission ``k``; "combined" to the average over the ``n_rt``
retransmissions.

With ``error_vars`` given the formulas describe the precoded link, where the
effective channel columns are uncorrelated with per-dimension variances
``error_vars`` (the prediction-error variances).  Without it the channel has
row-wise autocorrelation ``R[m] = rho^|m| sigma2_h``.
"""

import numpy as np

__all__ = [
    "lag_matrix_sq",
    "mean_gain",
    "gain_second_moment",
    "interference_power",
    "noise_power",
    "interference_noise_power",
]


def lag_matrix_sq(cfg):
    """``R[j - i]^2`` for all antenna pairs, zeroed on the diagonal."""
    idx = np.arange(cfg.n_t)
    lag = np.abs(idx[:, None] - idx[None, :])
    r2 = (cfg.rho ** lag * cfg.sigma2_h) ** 2
    np.fill_diagonal(r2, 0.0)
    return r2


def _check_vars(cfg, error_vars):
    v = np.asarray(error_vars, dtype=float)
    if v.shape != (cfg.n_t,):
        raise ValueError(f"need {cfg.n_t} error variances, got shape {v.shape}")
    return v


def mean_gain(cfg, error_vars=None):
    """``E[F_k,ii] = 2 n_r sigma^2`` (``sigma^2`` is ``sigma2_h`` or ``sigma2_Z,i``)."""
    if error_vars is None:
        return np.full(cfg.n_t, 2.0 * cfg.n_r * cfg.sigma2_h)
    return 2.0 * cfg.n_r * _check_vars(cfg, error_vars)


def gain_second_moment(cfg, combined=False, error_vars=None):
    """``E[F_k,ii^2]`` before combining, ``E[F_i^2]`` after."""
    var = (
        np.full(cfg.n_t, cfg.sigma2_h) if error_vars is None else _check_vars(cfg, error_vars)
    )
    n_r, n_rt = cfg.n_r, cfg.n_rt
    if not combined:
        return 4.0 * var**2 * n_r * (n_r + 1)
    return 4.0 * n_r * var**2 * (1.0 + n_r * n_rt) / n_rt


def interference_power(cfg, combined=False, error_vars=None):
    """Power of the inter-antenna interference term at each antenna."""
    n_r, n_rt, p_av = cfg.n_r, cfg.n_rt, cfg.p_av
    if error_vars is not None:
        v = _check_vars(cfg, error_vars)
        others = v.sum() - v
        power = 4.0 * p_av * n_r * v * others
        return power / n_rt if combined else power

    r2 = lag_matrix_sq(cfg)
    others = cfg.n_t - 1
    sum_r2 = r2.sum(axis=1)
    single = 4.0 * p_av * n_r * (others * cfg.sigma2_h**2 + n_r * sum_r2)
    if not combined:
        return single
    cross = 4.0 * p_av * n_r**2 * (n_rt - 1) * sum_r2
    return (single + cross) / n_rt


def noise_power(cfg, combined=False, error_vars=None):
    """Power of the filtered thermal noise at each antenna."""
    var = (
        np.full(cfg.n_t, cfg.sigma2_h) if error_vars is None else _check_vars(cfg, error_vars)
    )
    power = 4.0 * cfg.n_r * var * cfg.sigma2_w
    return power / cfg.n_rt if combined else power


def interference_noise_power(cfg, combined=False, error_vars=None):
    return interference_power(cfg, combined, error_vars) + noise_power(cfg, combined, error_vars)
