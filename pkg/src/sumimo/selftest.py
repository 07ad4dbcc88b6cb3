"""Quick built-in consistency checks, run by ``sumimo selftest``."""

import itertools

import numpy as np

from .channel import ChannelConfig, EqualizedFrame
from .codes import build_trellis, make_interleaver, rsc_encode
from .precoder import autocorrelation_sequence, levinson_durbin, predictor_for
from .sctc import sctc_decode, sctc_encode
from .sinr import sinr_precoded_ub, to_db


def _shift_register_parity(bits):
    # y[n] = u[n] ^ u[n-2] ^ y[n-1] ^ y[n-2]
    y = []
    for n, u in enumerate(bits):
        v = u
        v ^= bits[n - 2] if n >= 2 else 0
        v ^= y[n - 1] if n >= 1 else 0
        v ^= y[n - 2] if n >= 2 else 0
        y.append(v)
    return y


def check_encoder():
    for word in itertools.product((0, 1), repeat=8):
        if list(rsc_encode(word)[1::2]) != _shift_register_parity(list(word)):
            return False, f"parity mismatch for {word}"
    return True, "256 words match the shift-register recurrence"


def check_levinson():
    p = levinson_durbin(autocorrelation_sequence(0.9, 1.0, 8))
    ok = np.allclose(p.coeffs[:, 0], -0.9, atol=1e-12) and np.allclose(p.error_vars[1:], 0.19)
    return bool(ok), f"a_i1 = {p.coeffs[:, 0].min():.12f}, sigma2_Z = {p.error_vars[1]:.12f}"


def check_sinr_anchor():
    vals = []
    for n_t in (50, 512):
        cfg = ChannelConfig(n_t=n_t, n_r=1024 - n_t, n_rt=2, rho=0.9)
        vals.append(float(to_db(sinr_precoded_ub(cfg, predictor_for(cfg), n_t))))
    ok = abs(vals[0] - 18.6) <= 0.1 and abs(vals[1] - 6.0) <= 0.1
    return ok, f"{vals[0]:.3f} dB at N_t=50, {vals[1]:.3f} dB at N_t=512"


def check_noiseless_decode():
    rng = np.random.default_rng(0)
    il = make_interleaver(256, 7)
    a = rng.integers(0, 2, 128)
    s = sctc_encode(a, il, build_trellis()).s
    a_hat, _ = sctc_decode(EqualizedFrame(s, np.ones(s.size), 1e-3), il, 2)
    return bool(np.array_equal(a, a_hat)), "noiseless SCTC frame"


CHECKS = {
    "encoder": check_encoder,
    "levinson": check_levinson,
    "sinr-anchor": check_sinr_anchor,
    "noiseless-decode": check_noiseless_decode,
}


def run_all():
    return [(name, *fn()) for name, fn in CHECKS.items()]
