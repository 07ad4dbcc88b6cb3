"""Parallel concatenated turbo code over QPSK.

Two RSC encoders share the data bits, the second one through the
interleaver.  The first ``L_d1`` symbols carry ``(a_i, p1_i)`` and the
remaining ``L_d1`` carry ``(a'_i, p2_i)`` with ``a' = interleave(a)``, the
systematic bit always on the in-phase axis.  Symbol ``i`` of the second
half therefore sits at index ``i + L_d1`` of the frame.

Because each half carries its own noisy copy of the systematic bits, the
extrinsic handed from one decoder to the other keeps the sender's own
systematic channel metric and only drops the a-priori input it received.
"""

from dataclasses import dataclass

import numpy as np

from .codes import build_trellis, rsc_encode
from .errors import InvalidArgumentError
from .sctc import DEFAULT_ITERATIONS, SoftSequence, hard_decision, qpsk_from_bits
from .siso import channel_bit_metrics, forward_backward

__all__ = ["PctcFrame", "pctc_encode", "pctc_decode"]


@dataclass(frozen=True)
class PctcFrame:
    a: np.ndarray
    p1: np.ndarray
    p2: np.ndarray
    s: np.ndarray


def pctc_encode(a, interleaver, trellis=None):
    trellis = trellis or build_trellis()
    a = np.asarray(a, dtype=np.int64).ravel()
    if interleaver.length != a.size:
        raise InvalidArgumentError(f"interleaver length {interleaver.length} != {a.size} data bits")
    a2 = interleaver.interleave(a)
    p1 = rsc_encode(a, trellis)[1::2]
    p2 = rsc_encode(a2, trellis)[1::2]
    s = np.concatenate([qpsk_from_bits(a, p1), qpsk_from_bits(a2, p2)])
    return PctcFrame(a=a, p1=p1, p2=p2, s=s)


def _half(x, sl):
    x = np.asarray(x)
    return x[sl] if x.ndim else x


def pctc_decode(eq, interleaver, iterations=DEFAULT_ITERATIONS, trellis=None,
                scale_by_gain=True, diagnostics=None):
    """Iterative decoding of one PCTC frame.

    One iteration runs decoder 1 (first half of the frame) and then
    decoder 2 (second half).  The a-posteriori output is that of decoder 1
    after it has received decoder 2's last extrinsics.

    Returns ``(a_hat, llr)``.
    """
    if iterations < 1:
        raise InvalidArgumentError("iterations must be >= 1")
    n = interleaver.length
    if len(eq) != 2 * n:
        raise InvalidArgumentError(f"frame has {len(eq)} symbols, expected {2 * n}")
    trellis = trellis or build_trellis()
    first, second = slice(0, n), slice(n, 2 * n)
    sys1, par1 = channel_bit_metrics(
        eq.y[first], _half(eq.f, first), _half(eq.sigma2_u, first), scale_by_gain
    )
    sys2, par2 = channel_bit_metrics(
        eq.y[second], _half(eq.f, second), _half(eq.sigma2_u, second), scale_by_gain
    )

    prior1 = np.full((n, 2), 0.5)
    for _ in range(iterations):
        u1, _ = forward_backward(trellis, sys1, par1, prior1)
        ext1 = SoftSequence.from_pairs(sys1 * u1).pairs()
        prior2 = interleaver.interleave(ext1.T).T
        u2, _ = forward_backward(trellis, sys2, par2, prior2)
        ext2 = SoftSequence.from_pairs(sys2 * u2).pairs()
        prior1 = interleaver.deinterleave(ext2.T).T
    u1, _ = forward_backward(trellis, sys1, par1, prior1)
    app = SoftSequence.from_pairs(prior1 * sys1 * u1)
    if diagnostics is not None:
        diagnostics["prior_llr"] = SoftSequence.from_pairs(prior1).llr()
        diagnostics["extrinsic_llr"] = SoftSequence.from_pairs(sys1 * u1).llr()
    llr = app.llr()
    return hard_decision(llr), llr
