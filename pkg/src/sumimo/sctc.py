"""Serially concatenated turbo code over QPSK.

Encoder chain: data ``a`` -> outer RSC -> ``b`` -> interleave -> ``c`` ->
inner RSC.  Every inner trellis step emits one QPSK symbol with the
systematic bit on the in-phase axis and the parity bit on the quadrature
axis, so a frame of ``L_d1`` data bits becomes ``L_d = 2 L_d1`` symbols.

The decoder alternates an inner BCJR pass driven by the channel and an
outer BCJR pass driven by the deinterleaved inner extrinsics.
"""

from dataclasses import dataclass

import numpy as np

from .codes import bits_to_antipodal, build_trellis, rsc_encode
from .errors import InvalidArgumentError
from .siso import GAMMA_FLOOR, channel_bit_metrics, forward_backward

__all__ = [
    "DEFAULT_ITERATIONS",
    "SoftSequence",
    "SctcFrame",
    "qpsk_from_bits",
    "sctc_encode",
    "bcjr_inner",
    "bcjr_outer",
    "sctc_decode",
    "llr_from_soft",
    "hard_decision",
]

DEFAULT_ITERATIONS = 8


@dataclass(frozen=True)
class SoftSequence:
    """Per-bit probabilities of +1 (``plus``) and -1 (``minus``)."""

    plus: np.ndarray
    minus: np.ndarray

    @property
    def length(self):
        return self.plus.shape[0]

    def __len__(self):
        return self.length

    @classmethod
    def uniform(cls, length):
        half = np.full(int(length), 0.5)
        return cls(half, half.copy())

    @classmethod
    def from_pairs(cls, pairs):
        """Normalise an ``(L, 2)`` array of non-negative weights."""
        pairs = np.asarray(pairs, dtype=float)
        total = pairs.sum(axis=1, keepdims=True)
        p = pairs / total
        return cls(p[:, 0].copy(), p[:, 1].copy())

    @classmethod
    def from_bits(cls, bits):
        bits = np.asarray(bits)
        plus = (bits == 0).astype(float)
        return cls(plus, 1.0 - plus)

    def pairs(self):
        return np.stack([self.plus, self.minus], axis=1)

    def llr(self):
        return llr_from_soft(self.plus, self.minus)


def llr_from_soft(plus, minus):
    """``ln(plus / minus)`` with both probabilities floored at 1e-300."""
    plus = np.maximum(np.asarray(plus, dtype=float), GAMMA_FLOOR)
    minus = np.maximum(np.asarray(minus, dtype=float), GAMMA_FLOOR)
    return np.log(plus) - np.log(minus)


def hard_decision(llr):
    """Bit 1 where the log-ratio favours -1, else bit 0."""
    return (np.asarray(llr) < 0).astype(np.int64)


def qpsk_from_bits(sys_bits, par_bits):
    return bits_to_antipodal(sys_bits) + 1j * bits_to_antipodal(par_bits)


@dataclass(frozen=True)
class SctcFrame:
    a: np.ndarray
    b: np.ndarray
    c: np.ndarray
    inner_parity: np.ndarray
    s: np.ndarray


def sctc_encode(a, interleaver, trellis=None):
    trellis = trellis or build_trellis()
    a = np.asarray(a, dtype=np.int64).ravel()
    if interleaver.length != 2 * a.size:
        raise InvalidArgumentError(
            f"interleaver length {interleaver.length} != 2 * {a.size} data bits"
        )
    b = rsc_encode(a, trellis)
    c = interleaver.interleave(b)
    inner = rsc_encode(c, trellis)
    s = qpsk_from_bits(inner[0::2], inner[1::2])
    return SctcFrame(a=a, b=b, c=c, inner_parity=inner[1::2], s=s)


def _pairs(x, length):
    if x is None:
        return np.full((length, 2), 0.5)
    if isinstance(x, SoftSequence):
        return x.pairs()
    return np.asarray(x, dtype=float)


def bcjr_inner(y, f, sigma2_u, prior=None, trellis=None, scale_by_gain=True):
    """Extrinsic probabilities of the inner code bits ``c``.

    The returned probabilities keep the channel metric of each step and
    drop the a-priori input, so they can be fed to the outer decoder
    directly.
    """
    trellis = trellis or build_trellis()
    sys_p, par_p = channel_bit_metrics(y, f, sigma2_u, scale_by_gain)
    prior = _pairs(prior, sys_p.shape[0])
    u_excl, _ = forward_backward(trellis, sys_p, par_p, prior)
    return SoftSequence.from_pairs(sys_p * u_excl)


def bcjr_outer(extrinsic_c, interleaver, trellis=None):
    """Outer pass: returns ``(extrinsic_b, app_a)``.

    Deinterleaved inner extrinsics act as systematic (even ``b`` positions)
    and parity (odd positions) metrics; data bits are equiprobable.  The
    extrinsic on ``b[2j]`` leaves out the systematic metric of step ``j``,
    the one on ``b[2j+1]`` leaves out its parity metric.
    """
    trellis = trellis or build_trellis()
    eb = interleaver.deinterleave(_pairs(extrinsic_c, interleaver.length).T).T
    sys_p = np.ascontiguousarray(eb[0::2])
    par_p = np.ascontiguousarray(eb[1::2])
    u_excl, p_excl = forward_backward(trellis, sys_p, par_p)
    ext_b = np.empty_like(eb)
    ext_b[0::2] = u_excl
    ext_b[1::2] = p_excl
    return SoftSequence.from_pairs(ext_b), SoftSequence.from_pairs(u_excl * sys_p)


def sctc_decode(eq, interleaver, iterations=DEFAULT_ITERATIONS, trellis=None,
                scale_by_gain=True, diagnostics=None):
    """Iterative decoding of one frame.

    Parameters
    ----------
    eq : EqualizedFrame
        Combined observations of the ``L_d`` symbols in codeword order.
    diagnostics : dict, optional
        Filled with the inner a-priori and extrinsic log-ratios of the last
        iteration (``prior_llr``, ``extrinsic_llr``).

    Returns
    -------
    a_hat, llr
        Hard decisions and a-posteriori log-ratios of the data bits.
    """
    if iterations < 1:
        raise InvalidArgumentError("iterations must be >= 1")
    if len(eq) != interleaver.length:
        raise InvalidArgumentError(f"frame has {len(eq)} symbols, interleaver {interleaver.length}")
    trellis = trellis or build_trellis()
    prior_c = SoftSequence.uniform(len(eq))
    for _ in range(iterations):
        ext_c = bcjr_inner(eq.y, eq.f, eq.sigma2_u, prior_c, trellis, scale_by_gain)
        ext_b, app = bcjr_outer(ext_c, interleaver, trellis)
        last_prior = prior_c
        prior_c = SoftSequence.from_pairs(interleaver.interleave(ext_b.pairs().T).T)
    if diagnostics is not None:
        diagnostics["prior_llr"] = last_prior.llr()
        diagnostics["extrinsic_llr"] = ext_c.llr()
    llr = app.llr()
    return hard_decision(llr), llr
