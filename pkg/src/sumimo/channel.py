"""Rayleigh MIMO channel, transmission and matched-filter combining.

All variances exposed here are per real dimension.  A complex quantity with
per-dimension variance ``v`` has ``E|x|^2 = 2 v``.
"""

from dataclasses import dataclass

import numpy as np
from scipy.signal import lfilter

from . import moments
from .errors import InvalidArgumentError

__all__ = [
    "ChannelConfig",
    "EqualizedFrame",
    "complex_normal",
    "draw_channel",
    "transmit_block",
    "matched_filter_combine",
    "effective_noise_variance",
    "effective_noise_variance_correlated",
]


@dataclass(frozen=True)
class ChannelConfig:
    """Antenna counts and channel statistics of one link."""

    n_t: int
    n_r: int
    n_rt: int = 1
    sigma2_h: float = 0.5
    sigma2_w: float = 0.0
    rho: float = 0.0
    p_av: float = 2.0

    def __post_init__(self):
        if self.n_t < 1 or self.n_r < 1:
            raise InvalidArgumentError("need at least one transmit and one receive antenna")
        if self.n_rt < 1:
            raise InvalidArgumentError("n_rt must be >= 1")
        if self.sigma2_h <= 0:
            raise InvalidArgumentError("sigma2_h must be positive")
        if self.sigma2_w < 0:
            raise InvalidArgumentError("sigma2_w must be non-negative")
        if not 0.0 <= self.rho < 1.0:
            raise InvalidArgumentError(f"rho must lie in [0, 1), got {self.rho}")

    @property
    def n_tot(self):
        return self.n_t + self.n_r


@dataclass
class EqualizedFrame:
    """Combined observations ``y = f * s + u`` for a whole frame."""

    y: np.ndarray
    f: np.ndarray
    sigma2_u: np.ndarray

    def __post_init__(self):
        self.y = np.asarray(self.y, dtype=complex)
        self.f = np.asarray(self.f, dtype=float)
        self.sigma2_u = np.broadcast_to(
            np.asarray(self.sigma2_u, dtype=float), self.y.shape
        ).copy()
        if not (self.y.shape == self.f.shape == self.sigma2_u.shape):
            raise InvalidArgumentError("y, f and sigma2_u must have equal lengths")
        if np.any(self.f < 0):
            raise InvalidArgumentError("combined gains must be non-negative")

    def __len__(self):
        return self.y.shape[-1]


def complex_normal(rng, shape, var_per_dim):
    """Circular complex Gaussian samples with the given per-dimension variance."""
    scale = np.sqrt(var_per_dim)
    re = rng.standard_normal(shape)
    im = rng.standard_normal(shape)
    return scale * (re + 1j * im)


def draw_channel(cfg, rng, size=()):
    """Draw channel matrices of shape ``size + (n_r, n_t)``.

    For ``rho > 0`` every row is a first-order recursive (AR(1)) sequence
    along the transmit index, ``h[j] = rho h[j-1] + sqrt(1 - rho^2) w[j]``,
    started from a stationary sample so that ``E[h_i h_j^*] / 2 =
    rho^|i-j| sigma2_h`` holds exactly from the first column on.  Rows are
    independent.
    """
    size = (int(size),) if np.isscalar(size) else tuple(size)
    shape = size + (cfg.n_r, cfg.n_t)
    w = complex_normal(rng, shape, cfg.sigma2_h)
    if cfg.rho == 0.0 or cfg.n_t == 1:
        return w
    rho = cfg.rho
    h = np.empty_like(w)
    h[..., 0] = w[..., 0]
    zi = rho * w[..., :1]
    h[..., 1:], _ = lfilter([np.sqrt(1.0 - rho * rho)], [1.0, -rho], w[..., 1:], axis=-1, zi=zi)
    return h


def transmit_block(s, h, cfg, rng, precoder=None):
    """Received vectors ``r_k = H_k (B) s + w_k`` for every retransmission.

    ``s`` has shape ``(..., n_t)``, ``h`` shape ``(..., n_rt, n_r, n_t)``.
    Returns ``(..., n_rt, n_r)``.  The only draw from ``rng`` is the noise,
    so an identity precoder reproduces the plain path sample for sample.
    """
    s = np.asarray(s, dtype=complex)
    h = np.asarray(h)
    if h.ndim < 3 or h.shape[-2:] != (cfg.n_r, cfg.n_t) or h.shape[-3] != cfg.n_rt:
        raise InvalidArgumentError(
            f"channel shape {h.shape} does not match (n_rt, n_r, n_t) = "
            f"({cfg.n_rt}, {cfg.n_r}, {cfg.n_t})"
        )
    if s.shape[-1] != cfg.n_t:
        raise InvalidArgumentError(f"symbol vector length {s.shape[-1]} != n_t {cfg.n_t}")
    if precoder is not None:
        precoder = np.asarray(precoder)
        if precoder.shape != (cfg.n_t, cfg.n_t):
            raise InvalidArgumentError("precoder must be n_t x n_t")
        s = s @ precoder.T
    x = np.matmul(h, s[..., None, :, None])[..., 0]
    noise = complex_normal(rng, x.shape, cfg.sigma2_w)
    return x + noise


def matched_filter_combine(r, z):
    """Matched filter each retransmission and average over them.

    ``r`` has shape ``(..., n_rt, n_r)`` and ``z`` (the effective channel,
    ``H`` or ``H B``) shape ``(..., n_rt, n_r, n_t)``.  Returns ``(y, f)``
    with ``y_i = mean_k (Z_k^H r_k)_i`` and ``f_i = mean_k (Z_k^H Z_k)_ii``.
    """
    r = np.asarray(r)
    z = np.asarray(z)
    if r.size == 0 or z.size == 0 or z.shape[-3] == 0:
        raise InvalidArgumentError("need at least one retransmission")
    if r.shape[-2:] != z.shape[-3:-1]:
        raise InvalidArgumentError(f"received shape {r.shape} incompatible with channel {z.shape}")
    y = np.einsum("...krt,...kr->...t", z.conj(), r) / z.shape[-3]
    f = np.einsum("...krt,...krt->...t", z.conj(), z).real / z.shape[-3]
    return y, f


def effective_noise_variance(cfg):
    """Per-dimension interference-plus-noise variance after combining, uncorrelated channel."""
    if cfg.rho != 0.0:
        raise InvalidArgumentError("use effective_noise_variance_correlated for rho > 0")
    power = (
        4.0 * cfg.p_av * cfg.sigma2_h**2 * cfg.n_r * (cfg.n_t - 1)
        + 4.0 * cfg.sigma2_w * cfg.sigma2_h * cfg.n_r
    ) / cfg.n_rt
    return 0.5 * power


def effective_noise_variance_correlated(cfg, i, combined=True):
    """Per-dimension interference-plus-noise variance at antenna ``i`` (1-based).

    ``combined=False`` gives the single-transmission value; with ``n_rt = 1``
    both coincide.
    """
    if not 1 <= i <= cfg.n_t:
        raise InvalidArgumentError(f"antenna index {i} outside 1..{cfg.n_t}")
    power = moments.interference_power(cfg, combined) + moments.noise_power(cfg, combined)
    return 0.5 * float(power[i - 1])
