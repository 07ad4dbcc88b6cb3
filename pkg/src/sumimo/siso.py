"""Probability-domain forward-backward pass over the RSC trellis.

Every branch metric used by the decoders factorises into a systematic part,
a parity part and an a-priori part, each a pair of probabilities indexed by
bit (column 0 is +1, column 1 is -1).  :func:`forward_backward` runs the
normalised alpha/beta recursions on the product and returns the two
extrinsic sums the decoders need:

``u_excl[i, u]``
    sum over branches with systematic input ``u`` of
    ``alpha * parity_metric * beta`` (systematic metric and prior left out);
``p_excl[i, p]``
    sum over branches with parity ``p`` of
    ``alpha * systematic_metric * prior * beta`` (parity metric left out).

Both are normalised per step to a probability pair.
"""

import numpy as np
from numba import njit
from scipy.special import expit

from .errors import NumericalFailureError

__all__ = ["GAMMA_FLOOR", "forward_backward", "channel_bit_metrics"]

GAMMA_FLOOR = 1e-300


@njit(cache=True)
def _forward_backward(next_state, parity, sys_p, par_p, prior, start_known):
    n_steps = sys_p.shape[0]
    n_states = next_state.shape[0]
    gamma = np.empty((n_steps, n_states, 2))
    for i in range(n_steps):
        for m in range(n_states):
            for u in range(2):
                g = sys_p[i, u] * par_p[i, parity[m, u]] * prior[i, u]
                gamma[i, m, u] = g if g > 1e-300 else 1e-300

    alpha = np.zeros((n_steps + 1, n_states))
    if start_known:
        alpha[0, 0] = 1.0
    else:
        for m in range(n_states):
            alpha[0, m] = 1.0 / n_states
    for i in range(n_steps):
        for m in range(n_states):
            a = alpha[i, m]
            for u in range(2):
                alpha[i + 1, next_state[m, u]] += a * gamma[i, m, u]
        total = 0.0
        for n in range(n_states):
            total += alpha[i + 1, n]
        if not total > 0.0 or not np.isfinite(total):
            return np.zeros((0, 2)), np.zeros((0, 2)), i, 0
        for n in range(n_states):
            alpha[i + 1, n] /= total

    beta = np.empty((n_steps + 1, n_states))
    for m in range(n_states):
        beta[n_steps, m] = 1.0 / n_states
    for i in range(n_steps - 1, -1, -1):
        total = 0.0
        for m in range(n_states):
            b = 0.0
            for u in range(2):
                b += beta[i + 1, next_state[m, u]] * gamma[i, m, u]
            beta[i, m] = b
            total += b
        if not total > 0.0 or not np.isfinite(total):
            return np.zeros((0, 2)), np.zeros((0, 2)), i, 1
        for m in range(n_states):
            beta[i, m] /= total

    u_excl = np.zeros((n_steps, 2))
    p_excl = np.zeros((n_steps, 2))
    for i in range(n_steps):
        for m in range(n_states):
            a = alpha[i, m]
            for u in range(2):
                p = parity[m, u]
                t = a * beta[i + 1, next_state[m, u]]
                u_excl[i, u] += t * par_p[i, p]
                p_excl[i, p] += t * sys_p[i, u] * prior[i, u]
        su = u_excl[i, 0] + u_excl[i, 1]
        sp = p_excl[i, 0] + p_excl[i, 1]
        if not su > 0.0 or not sp > 0.0:
            return np.zeros((0, 2)), np.zeros((0, 2)), i, 2
        u_excl[i, 0] /= su
        u_excl[i, 1] /= su
        p_excl[i, 0] /= sp
        p_excl[i, 1] /= sp
    return u_excl, p_excl, -1, -1


_STAGES = ("forward", "backward", "extrinsic")


def forward_backward(trellis, sys_p, par_p, prior=None, start_known=True):
    """Run the normalised BCJR recursions and return ``(u_excl, p_excl)``.

    ``sys_p``, ``par_p`` and ``prior`` are ``(L, 2)`` arrays.  With
    ``start_known`` the encoder is assumed to start in state 0; the end
    state is left open (``beta`` starts uniform).  Branch metric products
    are floored at ``GAMMA_FLOOR``.
    """
    sys_p = np.ascontiguousarray(sys_p, dtype=np.float64)
    par_p = np.ascontiguousarray(par_p, dtype=np.float64)
    if prior is None:
        prior = np.full_like(sys_p, 0.5)
    prior = np.ascontiguousarray(prior, dtype=np.float64)
    if not (sys_p.shape == par_p.shape == prior.shape) or sys_p.ndim != 2 or sys_p.shape[1] != 2:
        raise ValueError("metrics must all be (L, 2) arrays")
    u_excl, p_excl, fail_at, stage = _forward_backward(
        np.ascontiguousarray(trellis.next_state),
        np.ascontiguousarray(trellis.parity_out),
        sys_p,
        par_p,
        prior,
        bool(start_known),
    )
    if fail_at >= 0:
        raise NumericalFailureError(int(fail_at), _STAGES[stage])
    return u_excl, p_excl


def channel_bit_metrics(y, f, sigma2_u, scale_by_gain=True):
    """Per-axis bit probabilities from combined observations.

    The branch metric ``exp(-|y - F S|^2 / (2 sigma2_u))`` of a QPSK symbol
    ``S = s_I + j s_Q`` splits into an in-phase (systematic) and a
    quadrature (parity) factor.  Each factor is normalised over its two
    hypotheses, which removes a per-step constant and keeps the values
    representable at any SNR.  ``scale_by_gain=False`` uses the unscaled
    reference ``S`` instead of ``F S``.

    Returns ``(sys_p, par_p)``, each ``(L, 2)``.
    """
    y = np.asarray(y, dtype=complex)
    g = np.asarray(f, dtype=float) if scale_by_gain else np.ones(y.shape)
    s2 = np.asarray(sigma2_u, dtype=float)
    # log-ratio of +1 vs -1 for (y - g s)^2 / (2 s2) is 2 g y / s2
    l_sys = 2.0 * g * y.real / s2
    l_par = 2.0 * g * y.imag / s2
    sys_p = np.stack([expit(l_sys), expit(-l_sys)], axis=-1)
    par_p = np.stack([expit(l_par), expit(-l_par)], axis=-1)
    np.maximum(sys_p, GAMMA_FLOOR, out=sys_p)
    np.maximum(par_p, GAMMA_FLOOR, out=par_p)
    return sys_p, par_p
