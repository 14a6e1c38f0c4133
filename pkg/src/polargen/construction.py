"""
Bit-channel qualities for N = 2^n independent, possibly different, BMS channels.

Two production paths share one level/Z-shape schedule (:func:`tran`):

* :func:`construct_bec_z` runs the Bhattacharyya recursion, exact for
  erasure-type channels (BEC, punctured = BEC(1), shortened = BEC(0)).
* :func:`construct_modified_tal_vardy` applies the one-step channel transform
  to every Z-shape and degrades each output to at most ``mu`` symbols.

:func:`exact_oracle` enumerates the split channels directly and is meant for
checking the other two on small N.

The schedule updates a length-N vector in place.  Position ``p`` (1-based)
ends up holding bit channel ``bit_reverse(p)``; results are returned in
bit-channel order.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .bits import bit_reversal_permutation, generator_matrix, log2_exact
from .channel import BmsChannel, canonical_channel, degrading_merge

ORACLE_LIMIT = 1 << 24


class OracleSizeError(ValueError):
    """Exact enumeration would exceed :data:`ORACLE_LIMIT` table entries."""


@dataclass
class BitChannelQuality:
    values: np.ndarray
    metric: str  # "bhattacharyya" or "errorProb"
    mu: int | None = None
    approx_calls: int = 0
    channels: list | None = field(default=None, repr=False)
    extra: dict = field(default_factory=dict, repr=False)

    @property
    def N(self):
        return len(self.values)

    def to_dict(self, info_set=None):
        d = {
            "N": self.N,
            "metric": self.metric,
            "mu": self.mu,
            "values": [float(v) for v in self.values],
        }
        if info_set is not None:
            d["infoSet"] = [int(i) for i in info_set]
        return d


def tran(i, j, N):
    """1-based indices ``(k1, k2)`` of the ``j``-th Z-shape at level ``i``."""
    n = log2_exact(N)
    if not 1 <= i <= n:
        raise ValueError(f"level {i} outside 1..{n}")
    if not 1 <= j <= N // 2:
        raise ValueError(f"Z-shape {j} outside 1..{N // 2}")
    half = 1 << (i - 1)
    pz = -(-j // half)
    k1 = (pz - 1) * (half << 1) + j - (pz - 1) * half
    return k1, k1 + half


def _level_indices(i, N):
    j = np.arange(1, N // 2 + 1)
    half = 1 << (i - 1)
    pz = (j + half - 1) // half
    k1 = (pz - 1) * 2 * half + j - (pz - 1) * half
    return k1 - 1, k1 - 1 + half


def _bit_channel_order(seq):
    perm = bit_reversal_permutation(log2_exact(len(seq)))
    if isinstance(seq, np.ndarray):
        return seq[perm]
    return [seq[p] for p in perm]


def _rows_with_erasure(w: BmsChannel):
    rows = w.pairs
    if w.erasure > 0:
        rows = np.vstack([rows, [[0.5 * w.erasure, 0.5 * w.erasure]]])
    return rows


def transform_pair(wu: BmsChannel, wb: BmsChannel):
    """One-step transform of two independent channels.

    Returns ``(w0, w1)``: the channel seen by the first input bit with the
    second unknown, and the channel seen by the second bit given the first.
    Both outputs are canonicalised (equal-ratio symbols combined, balanced
    symbols folded into the erasure).
    """
    A = _rows_with_erasure(wu)
    B = _rows_with_erasure(wb)
    a, b = A[:, :1], A[:, 1:]
    c, d = B[:, 0][None, :], B[:, 1][None, :]
    ac, bd, ad, bc = a * c, b * d, a * d, b * c
    w0 = canonical_channel((ac + bd).ravel(), (ad + bc).ravel())
    w1 = canonical_channel(
        np.concatenate([ac.ravel(), ad.ravel()]),
        np.concatenate([bd.ravel(), bc.ravel()]),
    )
    return w0, w1


def construct_bec_z(z):
    """Bhattacharyya recursion over the Z-shape schedule.

    ``z`` holds the initial parameter of each underlying channel in coded-bit
    order; the result is in bit-channel order.
    """
    z = np.array(z, dtype=np.float64)
    N = len(z)
    n = log2_exact(N)
    if np.any(z < 0) or np.any(z > 1):
        raise ValueError("Bhattacharyya parameters must lie in [0, 1]")
    for i in range(1, n + 1):
        k1, k2 = _level_indices(i, N)
        zu, zb = z[k1], z[k2]
        z[k1] = zu + zb - zu * zb
        z[k2] = zu * zb
    return BitChannelQuality(_bit_channel_order(np.clip(z, 0.0, 1.0)), "bhattacharyya")


def construct_modified_tal_vardy(channels, mu, reuse=False):
    """Degraded bit-channel approximation for heterogeneous underlying channels.

    Every Z-shape at every level is transformed and both outputs are reduced
    with :func:`degrading_merge`, so ``N log2 N`` merges are performed.  With
    ``reuse=True`` a Z-shape whose two inputs are the very same channel
    objects as an earlier one reuses that result (the outputs are identical
    by construction).  ``approx_calls`` always counts the merge invocations of
    the procedure (two per Z-shape); ``extra["mergesRun"]`` counts the ones
    actually executed.
    """
    W = list(channels)
    N = len(W)
    n = log2_exact(N)
    calls = 0
    run = 0
    memo = {}
    for i in range(1, n + 1):
        k1s, k2s = _level_indices(i, N)
        for k1, k2 in zip(k1s.tolist(), k2s.tolist()):
            key = (id(W[k1]), id(W[k2]))
            hit = memo.get(key) if reuse else None
            if hit is None:
                w0, w1 = transform_pair(W[k1], W[k2])
                hit = (degrading_merge(w0, mu), degrading_merge(w1, mu))
                run += 2
                if reuse:
                    # keep inputs alive so their ids stay unique for this level
                    memo[key] = hit + (W[k1], W[k2])
            W[k1], W[k2] = hit[0], hit[1]
            calls += 2
        memo.clear()
    bit_channels = _bit_channel_order(W)
    pe = np.array([w.stats.error_prob for w in bit_channels])
    return BitChannelQuality(pe, "errorProb", mu=int(mu), approx_calls=calls,
                             channels=bit_channels, extra={"mergesRun": run})


def _symbol_stats(w0, w1):
    s = w0 + w1
    with np.errstate(divide="ignore", invalid="ignore"):
        t0 = np.where(w0 > 0, 0.5 * w0 * np.log2(np.where(w0 > 0, 2 * w0 / s, 1.0)), 0.0)
        t1 = np.where(w1 > 0, 0.5 * w1 * np.log2(np.where(w1 > 0, 2 * w1 / s, 1.0)), 0.0)
    cap = (t0 + t1).sum(axis=-1)
    z = np.sqrt(w0 * w1).sum(axis=-1)
    pe = 0.5 * np.minimum(w0, w1).sum(axis=-1)
    return cap, z, pe


def exact_oracle(channels):
    """Exact capacity, Bhattacharyya parameter and error probability of every
    bit channel, by summing the split-channel definition over all source
    suffixes and enumerating every (output, source prefix) symbol.

    Only feasible for tiny N; raises :class:`OracleSizeError` when the joint
    likelihood table would exceed :data:`ORACLE_LIMIT` entries.
    """
    channels = list(channels)
    N = len(channels)
    log2_exact(N)
    tables = [w.symbols() for w in channels]
    joint = 1
    for t in tables:
        joint *= t.shape[0]
    if joint * (1 << N) > ORACLE_LIMIT:
        raise OracleSizeError(f"{joint} joint outputs x {1 << N} inputs exceeds limit")

    # Q[y, x] = prod_k W_k(y_k | x_k), x_1 most significant
    Q = np.ones((1, 1))
    for t in tables:
        Q = np.kron(Q, t)
    G = generator_matrix(N)
    u = (np.arange(1 << N)[:, None] >> np.arange(N - 1, -1, -1)) & 1
    x = (u @ G) % 2
    x_index = x @ (1 << np.arange(N - 1, -1, -1))
    WN = Q[:, x_index]  # WN[y, u]

    caps, zs, pes = np.empty(N), np.empty(N), np.empty(N)
    Y = WN.shape[0]
    for i in range(1, N + 1):
        A = WN.reshape(Y, 1 << (i - 1), 2, 1 << (N - i)).sum(axis=3) / (1 << (N - 1))
        w0 = A[:, :, 0].ravel()
        w1 = A[:, :, 1].ravel()
        caps[i - 1], zs[i - 1], pes[i - 1] = _symbol_stats(w0, w1)
    return BitChannelQuality(
        pes, "errorProb", extra={"capacity": caps, "bhattacharyya": zs, "errorProb": pes}
    )


def is_bec_family(w: BmsChannel):
    """True when every non-erasure symbol is noiseless (BEC, punctured, shortened)."""
    return bool(np.all(w.pairs[:, 1] == 0))


def construct(channels, mu=256, reuse=False):
    """Pick the BEC recursion when it is exact, the modified Tal-Vardy procedure otherwise."""
    channels = list(channels)
    if all(is_bec_family(w) for w in channels):
        return construct_bec_z([w.stats.bhattacharyya for w in channels])
    return construct_modified_tal_vardy(channels, mu, reuse=reuse)


def select_info_set(quality: BitChannelQuality, K, exclude=()):
    """1-based indices of the ``K`` best bit channels (smallest value), ascending.

    Ties go to the lower index.  Indices in ``exclude`` are never chosen.
    """
    N = quality.N
    K = int(K)
    excluded = set(int(e) for e in exclude)
    if not 0 <= K <= N - len(excluded):
        raise ValueError(f"K={K} outside 0..{N - len(excluded)}")
    order = np.argsort(np.asarray(quality.values), kind="stable") + 1
    chosen = [int(i) for i in order if int(i) not in excluded][:K]
    return sorted(chosen)
