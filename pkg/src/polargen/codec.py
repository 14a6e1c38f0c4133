"""Non-systematic polar encoder and LLR-domain successive-cancellation decoder.

Both work on a single frame (1-D arrays) or a batch of frames (2-D arrays,
one frame per row).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .bits import bit_reversal_permutation, log2_exact
from .channel import awgn_sigma2, make_awgn_quantized, make_channel

LLR_MAX = 300.0
BEC_ERASURE = 2  # received symbol for an erased bit


def polar_transform(v):
    """``v F^{(x)n}`` over GF(2), butterflies along the last axis."""
    c = np.array(v, dtype=np.uint8, copy=True)
    N = c.shape[-1]
    lead = c.shape[:-1]
    s = 1
    while s < N:
        view = c.reshape(*lead, N // (2 * s), 2, s)
        view[..., 0, :] ^= view[..., 1, :]
        s *= 2
    return c


def encode(u):
    """``x = u B_N F^{(x)n}``."""
    u = np.asarray(u)
    n = log2_exact(u.shape[-1])
    return polar_transform(u[..., bit_reversal_permutation(n)])


@dataclass(frozen=True)
class TxChannel:
    """A physical channel used in simulation.

    ``kind`` is ``bec`` (param = erasure probability), ``bsc`` (param =
    crossover probability) or ``awgn`` (param = Es/N0 in dB, BPSK with
    0 -> +1).
    """

    kind: str
    param: float

    @property
    def sigma2(self):
        return awgn_sigma2(self.param)

    def design_channel(self, alphabet_size=2048):
        if self.kind == "awgn":
            return make_awgn_quantized(self.param, alphabet_size)
        return make_channel(self.kind, self.param)

    def transmit(self, x, rng):
        x = np.asarray(x)
        if self.kind == "bec":
            y = x.astype(np.int8)
            y[rng.random(x.shape) < self.param] = BEC_ERASURE
            return y
        if self.kind == "bsc":
            return (x ^ (rng.random(x.shape) < self.param)).astype(np.uint8)
        if self.kind == "awgn":
            return 1.0 - 2.0 * x + np.sqrt(self.sigma2) * rng.standard_normal(x.shape)
        raise ValueError(f"unknown channel kind {self.kind!r}")

    def llr(self, y):
        y = np.asarray(y)
        if self.kind == "bec":
            if np.any((y != 0) & (y != 1) & (y != BEC_ERASURE)):
                raise ValueError("BEC symbols must be 0, 1 or the erasure marker")
            out = np.where(y == 0, LLR_MAX, -LLR_MAX)
            return np.where(y == BEC_ERASURE, 0.0, out)
        if self.kind == "bsc":
            if np.any((y != 0) & (y != 1)):
                raise ValueError("BSC symbols must be 0 or 1")
            p = self.param
            mag = LLR_MAX if p == 0 else min(np.log((1 - p) / p), LLR_MAX)
            return np.where(y == 0, mag, -mag)
        if self.kind == "awgn":
            return np.clip(2.0 * y / self.sigma2, -LLR_MAX, LLR_MAX)
        raise ValueError(f"unknown channel kind {self.kind!r}")


def init_llrs(received, channel: TxChannel, spec):
    """Length-N LLRs from the M received symbols.

    Punctured positions get 0 (no information), shortened positions the
    saturated +LLR_MAX (value known to be 0), all others the channel LLR.
    """
    received = np.asarray(received)
    if received.shape[-1] != spec.M:
        raise ValueError(f"expected {spec.M} received symbols, got {received.shape[-1]}")
    lead = received.shape[:-1]
    llr = np.empty(lead + (spec.N,))
    if spec.mode == "shorten":
        llr[...] = LLR_MAX
    else:
        llr[...] = 0.0
    llr[..., spec.transmitted_positions()] = channel.llr(received)
    return llr


def _f(a, b):
    # exact check-node update 2 atanh(tanh(a/2) tanh(b/2)), overflow-free form
    m = np.sign(a) * np.sign(b) * np.minimum(np.abs(a), np.abs(b))
    r = m + np.log1p(np.exp(-np.abs(a + b))) - np.log1p(np.exp(-np.abs(a - b)))
    return np.clip(r, -LLR_MAX, LLR_MAX)


def _g(a, b, c):
    return np.clip(b + (1.0 - 2.0 * c) * a, -LLR_MAX, LLR_MAX)


def _sc(L, frozen, u_hat, lo):
    n = L.shape[-1]
    if n == 1:
        if frozen[lo]:
            bit = np.zeros(L.shape, dtype=np.uint8)
        else:
            bit = (L < 0).astype(np.uint8)
        u_hat[:, lo] = bit[:, 0]
        return bit
    h = n // 2
    L1, L2 = L[:, :h], L[:, h:]
    if frozen[lo:lo + h].all():
        ca = np.zeros((L.shape[0], h), dtype=np.uint8)
    else:
        ca = _sc(_f(L1, L2), frozen, u_hat, lo)
    cb = _sc(_g(L1, L2, ca), frozen, u_hat, lo + h)
    return np.concatenate([ca ^ cb, cb], axis=1)


def sc_decode(llr, frozen):
    """Successive-cancellation decoding.

    Parameters
    ----------
    llr : array (N,) or (B, N)
        Channel LLRs in coded-bit order, positive favouring 0.
    frozen : array-like
        Boolean mask of length N or a collection of 1-based frozen indices.

    Returns
    -------
    uint8 array of the same shape with the decoded source bits.  Frozen bits
    are 0; information bits with LLR exactly 0 decode to 0.
    """
    llr = np.asarray(llr, dtype=np.float64)
    single = llr.ndim == 1
    L = np.atleast_2d(llr)
    N = L.shape[-1]
    n = log2_exact(N)
    mask = np.asarray(frozen)
    if mask.dtype != bool or mask.shape != (N,):
        idx = np.asarray(list(frozen), dtype=np.int64)
        mask = np.zeros(N, dtype=bool)
        mask[idx - 1] = True
    L = L[:, bit_reversal_permutation(n)]
    u_hat = np.zeros(L.shape, dtype=np.uint8)
    if not mask.all():
        _sc(L, mask, u_hat, 0)
    return u_hat[0] if single else u_hat
