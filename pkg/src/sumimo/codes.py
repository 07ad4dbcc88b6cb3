"""Rate-1/2 recursive systematic convolutional code and interleaver.

Both concatenation schemes use the same constituent code with generator
matrix ``G(D) = [1, (1 + D^2) / (1 + D + D^2)]``.  The encoder state is the
two-bit shift register ``(d[n-1], d[n-2])`` of the feedback sequence
``d[n] = u[n] ^ d[n-1] ^ d[n-2]``, packed as ``2 * d[n-1] + d[n-2]``; the
parity bit is ``d[n] ^ d[n-2]``.

Bits are 0/1 integers.  Bit 0 is the antipodal value +1 and bit 1 is -1;
wherever a pair of probabilities is stored, column 0 refers to +1.
"""

from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from .errors import InvalidArgumentError

__all__ = [
    "Trellis",
    "Interleaver",
    "build_trellis",
    "rsc_encode",
    "make_interleaver",
    "bits_to_antipodal",
]


def bits_to_antipodal(bits):
    """Map bit 0 to +1 and bit 1 to -1."""
    return 1.0 - 2.0 * np.asarray(bits, dtype=float)


@dataclass(frozen=True)
class Trellis:
    """State transition structure of the 4-state RSC code.

    ``next_state[m, u]`` and ``parity_out[m, u]`` are indexed by the current
    state and the input bit.  ``rho_plus[m]``/``rho_minus[m]`` are the
    successors of ``m`` for systematic input +1/-1, ``mu_plus[m]``/``mu_minus[m]``
    the successors whose branch carries parity +1/-1.
    """

    num_states: int
    next_state: np.ndarray
    parity_out: np.ndarray
    converge_sets: tuple
    diverge_sets: tuple
    rho_plus: np.ndarray
    rho_minus: np.ndarray
    mu_plus: np.ndarray
    mu_minus: np.ndarray

    def step(self, state, bit):
        return int(self.next_state[state, bit]), int(self.parity_out[state, bit])


@lru_cache(maxsize=None)
def build_trellis():
    num_states = 4
    next_state = np.zeros((num_states, 2), dtype=np.int64)
    parity_out = np.zeros((num_states, 2), dtype=np.int64)
    for state in range(num_states):
        d1, d2 = state >> 1, state & 1
        for u in (0, 1):
            d = u ^ d1 ^ d2
            next_state[state, u] = (d << 1) | d1
            parity_out[state, u] = d ^ d2

    diverge = tuple(tuple(int(n) for n in next_state[m]) for m in range(num_states))
    converge = tuple(
        tuple(m for m in range(num_states) if n in diverge[m]) for n in range(num_states)
    )
    for m in range(num_states):
        if len(set(diverge[m])) != 2 or len(converge[m]) != 2:
            raise AssertionError("every state needs two successors and two predecessors")
        if parity_out[m, 0] == parity_out[m, 1]:
            raise AssertionError(f"state {m}: outgoing branches share a parity bit")

    rho_plus = next_state[:, 0].copy()
    rho_minus = next_state[:, 1].copy()
    # the two branches leaving a state carry distinct parity bits
    mu_plus = np.where(parity_out[:, 0] == 0, next_state[:, 0], next_state[:, 1])
    mu_minus = np.where(parity_out[:, 0] == 1, next_state[:, 0], next_state[:, 1])

    for arr in (next_state, parity_out, rho_plus, rho_minus, mu_plus, mu_minus):
        arr.setflags(write=False)
    return Trellis(
        num_states=num_states,
        next_state=next_state,
        parity_out=parity_out,
        converge_sets=converge,
        diverge_sets=diverge,
        rho_plus=rho_plus,
        rho_minus=rho_minus,
        mu_plus=mu_plus,
        mu_minus=mu_minus,
    )


def rsc_encode(bits, trellis=None):
    """Encode ``bits`` from state 0 without termination.

    Returns an array of length ``2 * len(bits)``: even positions hold the
    systematic bits, odd positions the parity bits.
    """
    trellis = trellis or build_trellis()
    bits = np.asarray(bits, dtype=np.int64).ravel()
    out = np.empty(2 * bits.size, dtype=np.int64)
    nxt = trellis.next_state.tolist()
    par = trellis.parity_out.tolist()
    state = 0
    for i, u in enumerate(bits.tolist()):
        out[2 * i] = u
        out[2 * i + 1] = par[state][u]
        state = nxt[state][u]
    return out


@dataclass(frozen=True)
class Interleaver:
    """Permutation ``pi`` with ``interleave(x)[pi[j]] = x[j]``.

    With this convention the interleaved sequence satisfies
    ``c[pi[j]] = b[j]`` and ``c[i] = b[pi_inv[i]]``.
    """

    length: int
    pi: np.ndarray
    pi_inv: np.ndarray = field(repr=False)
    seed: int | None = None

    def interleave(self, x):
        x = np.asarray(x)
        return x[..., self.pi_inv]

    def deinterleave(self, y):
        y = np.asarray(y)
        return y[..., self.pi]


def make_interleaver(length, seed=0, identity=False):
    """Uniform random interleaver of the given length.

    The permutation is a Fisher-Yates shuffle (``numpy.random.Generator.permutation``)
    driven by a PCG64 generator seeded with ``seed``, so a given
    ``(length, seed)`` always yields the same map.  ``identity=True`` returns
    the identity permutation, which is handy in tests.
    """
    length = int(length)
    if length < 2:
        raise InvalidArgumentError(f"interleaver length must be >= 2, got {length}")
    if identity:
        pi = np.arange(length, dtype=np.int64)
    else:
        rng = np.random.Generator(np.random.PCG64(int(seed)))
        pi = rng.permutation(length).astype(np.int64)
    pi_inv = np.empty_like(pi)
    pi_inv[pi] = np.arange(length, dtype=np.int64)
    pi.setflags(write=False)
    pi_inv.setflags(write=False)
    return Interleaver(length=length, pi=pi, pi_inv=pi_inv, seed=None if identity else int(seed))
